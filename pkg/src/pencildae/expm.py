"""Matrix exponential by scaling and squaring with a degree-13 Pade approximant."""

import numpy as np

# Higham (2005): [13/13] Pade coefficients and the 1-norm bound theta_13.
_B13 = (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
        960960.0, 16380.0, 182.0, 1.0)
_THETA13 = 5.371920351148152


def expm(M) -> np.ndarray:
    """``exp(M)`` for a square matrix ``M``.

    The fixed order keeps the method free of eigendecomposition assumptions;
    ``M`` is scaled by ``2**-s`` so that ``||M / 2**s||_1 <= theta_13`` and the
    approximant is squared ``s`` times.
    """
    M = np.asarray(M)
    n = M.shape[0]
    if n == 0:
        return M.copy()
    dtype = np.result_type(M.dtype, float)
    M = M.astype(dtype)
    norm1 = np.linalg.norm(M, 1)
    s = 0
    if norm1 > _THETA13:
        s = int(np.ceil(np.log2(norm1 / _THETA13)))
        M = M / 2.0**s
    b = _B13
    eye = np.eye(n, dtype=dtype)
    M2 = M @ M
    M4 = M2 @ M2
    M6 = M2 @ M4
    U = M @ (M6 @ (b[13] * M6 + b[11] * M4 + b[9] * M2)
             + b[7] * M6 + b[5] * M4 + b[3] * M2 + b[1] * eye)
    V = (M6 @ (b[12] * M6 + b[10] * M4 + b[8] * M2)
         + b[6] * M6 + b[4] * M4 + b[2] * M2 + b[0] * eye)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R
