"""Independent reference values shared by the test modules.

``marcum_q_oracle`` goes through scipy's noncentral chi-square survival
function and never touches the package's own series code, so agreement
between the two is a real check, not a tautology.

The frozen constants were computed before the library existed — by adaptive
quadrature of the Marcum-Q integrand and by raw Monte-Carlo sampling of the
corresponding physical channel experiments (1e8 samples; bands are
p_hat +/- 3 sigma).  They are pinned as plain numbers so a regression can
never recompute its own expectation.
"""

from scipy.stats import ncx2


def marcum_q_oracle(m: int, a: float, b: float) -> float:
    """Q_m(a, b) as the ncx2 survival function: df = 2m, nc = a^2, at b^2."""
    return float(ncx2.sf(b * b, 2 * m, a * a))


# Quadrature of the Q_1 integrand (error estimate 2.5e-14).
MARCUM_Q1_1_1 = 0.732879803796820

# ncx2.sf(1.44, 4, 1), cross-checked against a 1e8-sample MC tail estimate.
MARCUM_Q2_1_1P2 = 0.889667582149882
MARCUM_Q2_1_1P2_BAND = (0.889554562, 0.889742558)

# 1 - Q_3(sqrt(3)a, b) for c=0.3, R=1, snr=10**1.5, plus the MC band from
# 1e8 sampled gain triples.
OUTAGE_FF_C03_Q3 = 4.166400246603629e-06
OUTAGE_FF_C03_Q3_BAND = (3.530e-06, 4.750e-06)

# Two-hop residual-carrying recursion, q=[2,0], c=[0,0], R=1, snr=10,
# expanded by hand (equals 1 - e^-0.1).
FC_TWO_HOP_FRONTLOAD = 0.181269246922018

# Exhaustive slow-fading exact optimum over the 330 allocations of the
# five-hop reference network c=(0.1,0.5,0.1,0.3,0.7), R=1, snr=10**0.5,
# q_sum=12, plus the optimum of the approximate objective.
REF5_NETWORK_LOS = (0.1, 0.5, 0.1, 0.3, 0.7)
REF5_SNR = 10 ** 0.5
REF5_QSUM = 12
REF5_OPT_ALLOC = (3, 2, 3, 2, 2)
REF5_OPT_PDP = 0.423040086947470
REF5_APPROX_ALLOC = (3, 2, 3, 3, 1)
REF5_APPROX_VALUE = 4.266036918229437e-01
REF5_SF_COEFFS = (
    0.314414486778046,
    0.232667387690336,
    0.314414486778046,
    0.294290168370229,
    0.102217429213391,
)

# Closed-form anchors, 12 significant digits.
Q1_0_2 = 0.135335283237              # e^-2
Q2_0_2 = 0.406005849710              # 3 e^-2
Q1_APPROX_1_0P1 = 0.996967346701     # 1 - 0.005 e^-0.5
NC_TWO_HOP_RAYLEIGH = 0.181269246922  # 1 - e^-0.1
TYPE1_TWO_HOP_2_2 = 0.018029824379
QM_APPROX_5_1_0P3 = 0.999999999067317
OUTAGE_FF_RAYLEIGH_Q2 = 0.004678840160  # 1 - e^-0.1 (1 + 0.1)
OUTAGE_SF_RAYLEIGH_Q4 = 0.024690087972  # 1 - e^-0.025
