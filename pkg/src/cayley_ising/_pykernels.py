"""Pure-Python counterparts of the compiled kernels (same signatures)."""

import numpy as np


def ball_forms(start, stop, base, nfree, balls, parity):
    idx = np.arange(start, stop, dtype=np.int64)
    spins = np.tile(np.asarray(base, dtype=np.int32), (len(idx), 1))
    bits = (idx[:, None] >> np.arange(nfree, dtype=np.int64)[None, :]) & 1
    spins[:, :nfree] = 1 - 2 * bits.astype(np.int32)
    balls = np.asarray(balls)
    parity = np.asarray(parity, dtype=bool)
    center = spins[:, balls[:, 0]]
    s = spins[:, balls[:, 1:]].sum(axis=2)
    out = np.empty((len(idx), 4), dtype=np.int32)
    out[:, 0] = (center * s).sum(axis=1)
    out[:, 1] = ((s * s - (balls.shape[1] - 1)) // 2).sum(axis=1)
    out[:, 2] = center[:, ~parity].sum(axis=1)
    out[:, 3] = center[:, parity].sum(axis=1)
    return out


def metropolis(spins, nn, nnn, parity, accept, sites, uniforms):
    nn = [list(map(int, row)) for row in nn]
    nnn = [list(map(int, row)) for row in nnn]
    parity = [int(p) for p in parity]
    deg = len(nn[0]) if nn else 0
    deg2 = len(nnn[0]) if nnn else 0
    sweeps = len(uniforms)
    trace = np.empty(sweeps, dtype=np.int8)
    state = [int(s) for s in spins]
    for sw in range(sweeps):
        u = uniforms[sw]
        for st, x in enumerate(sites[sw].tolist()):
            n1 = sum(state[y] for y in nn[x])
            n2 = sum(state[y] for y in nnn[x])
            s = state[x]
            if u[st] < accept[parity[x], (s + 1) // 2, n1 + deg, n2 + deg2]:
                state[x] = -s
        trace[sw] = state[0]
    spins[:] = state
    return trace
