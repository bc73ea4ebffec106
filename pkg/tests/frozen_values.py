"""Values frozen from ``tests/oracles/derive_values.py`` (sympy, no package imports)."""

import math
from fractions import Fraction

RUGBY_UNIT_LOOP = math.pi  # for every beta

RUGBY_HOLONOMY_HALF = {
    1e-1: 0.57119866428905332,
    1e-2: 0.062209755516629569,
    1e-3: 0.0062769083987808057,
    1e-4: 0.00062825570514744390,
}

PRODUCT_DENSITY_04_AT_1_1PI = 0.65975395538644713  # 2^(2/5) / 2
PRODUCT_DENSITY_07_AT_HALF_2MI = 0.93524844782262133

A3_ENERGY = {2: Fraction(21), 3: Fraction(30), 4: Fraction(39), 5: Fraction(48)}

RUGBY_AREA_HALF_K1 = 2 * math.pi
RUGBY_AREA_03_K4 = 3 * math.pi / 10

CUSP_SEIFERT_WEIGHT = Fraction(1)
