"""Linearized unstable batch reactor, the standard networked-control benchmark.

``A_C``/``B_C`` are the continuous-time model. Sampling it with period
``H`` and designing LQR with ``Q = I4``, ``R = 0.05 I2`` gives the discrete
plant used throughout the tests. The ``PRINTED_*`` arrays are the same
matrices rounded to four decimals as they are usually tabulated.
"""

import numpy as np

A_C = np.array([
    [1.38, -0.2077, 6.715, -5.676],
    [-0.5814, -4.29, 0.0, 0.675],
    [1.067, 4.273, -6.654, 5.893],
    [0.048, 4.273, 1.343, -2.104],
])
B_C = np.array([
    [0.0, 0.0],
    [5.679, 0.0],
    [1.136, -3.146],
    [1.136, 0.0],
])
H = 0.01
Q = np.eye(4)
R = 0.05 * np.eye(2)

PRINTED_A = np.array([
    [1.0142, -0.0018, 0.0651, -0.0546],
    [-0.0057, 0.9582, -0.0001, 0.0067],
    [0.0103, 0.0417, 0.9363, 0.0563],
    [0.0004, 0.0417, 0.0129, 0.9797],
])
PRINTED_B = 1e-2 * np.array([
    [0.0005, -0.1034],
    [5.5629, 0.0002],
    [1.2511, -3.0444],
    [1.2511, -0.0205],
])
PRINTED_K = np.array([
    [1.3565, -3.3445, -0.5501, -3.8646],
    [5.8856, -0.0462, 4.5150, -2.4334],
])

X0 = np.array([-1.0, -1.0, -1.0, 1.0])
E0 = 1.1
SIGMA = 0.28
TAU_MAX = 20
GAMMA = 0.9496
HORIZON = 200


def plant():
    """Discretized reactor with its LQR gain, as a ``PlantModel``."""
    from .linops import dlqr, zoh_discretize
    from .simkit import PlantModel

    a, b = zoh_discretize(A_C, B_C, H)
    return PlantModel(a, b, dlqr(a, b, Q, R))
