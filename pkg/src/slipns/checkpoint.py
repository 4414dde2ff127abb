"""Binary checkpoints: versioned header + raw little-endian float64 payload.

Layout (all little-endian):
  magic     8 bytes  b"SLIPNSCK"
  version   u32
  nx ny nz  u32 x3
  lx ly lz  f64 x3
  a gamma mu lambda rho_bar  f64 x5
  time      f64
  step      u64
  cfg hash  32 bytes (sha256 of the effective config text; zeros if unknown)
  payload   rho interior, then m_x, m_y, m_z interior faces,
            each flattened x-fastest (Fortran order)

The payload stores raw IEEE bytes, so write -> read round trips bitwise.
"""

import os
import struct
import tempfile

import numpy as np

from .errors import CheckpointError
from .grid import FACE, EosParams, FlowState, ScalarField, VectorField, build_grid, fill_ghosts

MAGIC = b"SLIPNSCK"
VERSION = 1
_HEADER = struct.Struct("<8sI3I3d5ddQ32s")


def _payload_arrays(state: FlowState):
    arrs = [state.rho.interior]
    for d in range(3):
        arrs.append(state.mom.component_interior(d))
    return arrs


def write_checkpoint(state: FlowState, path, eos: EosParams, step=0, cfg_hash=b""):
    """Serialize a state; the file appears atomically (write + rename)."""
    grid = state.grid
    digest = (cfg_hash or b"").ljust(32, b"\0")[:32]
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        grid.nx,
        grid.ny,
        grid.nz,
        grid.lx,
        grid.ly,
        grid.lz,
        eos.a,
        eos.gamma,
        eos.mu,
        eos.lam,
        eos.rho_bar,
        state.t,
        int(step),
        digest,
    )
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)) or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            for arr in _payload_arrays(state):
                fh.write(np.asarray(arr, dtype="<f8").tobytes(order="F"))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_checkpoint(path, expected_hash=None, allow_hash_mismatch=False):
    """Load a checkpoint; returns (state, eos, step, cfg_hash).

    The state comes back ghost-filled. expected_hash (when given) must
    match the stored config hash unless allow_hash_mismatch is set.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise CheckpointError(f"{path}: file shorter than the header")
    (magic, version, nx, ny, nz, lx, ly, lz,
     a, gamma, mu, lam, rho_bar, t, step, digest) = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"{path}: format version {version}, expected {VERSION}")
    if expected_hash is not None:
        stored = digest.rstrip(b"\0")
        wanted = expected_hash.rstrip(b"\0")
        if stored != wanted and not allow_hash_mismatch:
            raise CheckpointError(
                f"{path}: config hash mismatch; pass allow_hash_mismatch to override"
            )

    grid = build_grid((lx, ly, lz), (nx, ny, nz))
    eos = EosParams(a, gamma, mu, lam, rho_bar)
    shapes = [(nx, ny, nz), (nx + 1, ny, nz), (nx, ny + 1, nz), (nx, ny, nz + 1)]
    expected = _HEADER.size + 8 * sum(int(np.prod(s)) for s in shapes)
    if len(raw) != expected:
        raise CheckpointError(
            f"{path}: payload length {len(raw) - _HEADER.size} bytes, "
            f"expected {expected - _HEADER.size} (truncated or corrupt)"
        )

    offset = _HEADER.size
    arrays = []
    for shape in shapes:
        count = int(np.prod(shape))
        flat = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        arrays.append(flat.reshape(shape, order="F").astype(float))
        offset += 8 * count

    rho = ScalarField.zeros(grid)
    rho.interior[...] = arrays[0]
    mom = VectorField.zeros(grid, FACE)
    for d in range(3):
        mom.component_interior(d)[...] = arrays[d + 1]
    state = FlowState(t, rho, mom)
    fill_ghosts(state)
    return state, eos, int(step), digest
