"""Physical constants (SI)."""

import math

C_LIGHT = 299_792_458.0  # speed of light in vacuum [m/s]
TWO_PI = 2.0 * math.pi
DB_TO_NEPER_POWER = math.log(10.0) / 10.0  # power loss in dB -> ln(1/T)
