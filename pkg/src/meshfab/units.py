"""Unit conversion table.

All conversions used anywhere in the toolkit live here, as exact
definitional constants. Internal geometry is always millimetres;
structural quantities are SI (N, MPa, m/s) with the US-customary
inputs from fabrication practice converted on entry.
"""

MM_PER_FT = 304.8          # exact
MM_PER_IN = 25.4           # exact
MPS_PER_MPH = 0.44704      # exact
N_PER_LBF = 4.4482216      # standard g_n definition, N per pound-force
KG_PER_LB = 0.45359237     # exact
GRAVITY_MPS2 = 9.80665     # standard gravity


def mph_to_mps(mph: float) -> float:
    return mph * MPS_PER_MPH


def lbf_to_n(lbf: float) -> float:
    return lbf * N_PER_LBF


def ft_to_mm(ft: float) -> float:
    return ft * MM_PER_FT


def in_to_mm(inches: float) -> float:
    return inches * MM_PER_IN


def mm_to_in(mm: float) -> float:
    return mm / MM_PER_IN
