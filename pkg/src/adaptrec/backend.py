"""Kernel backend selection.

The compiled extension accelerates the bulk entry points; everything it
does not export falls through to the pure-Python backend.  Scalar exact
kernels always come from the pure backend because they must accept
arbitrary-precision integers (the compiled ones are fixed to 64 bits).
"""

from __future__ import annotations

from . import _pykernel as pure

try:
    from . import _core as compiled
except ImportError:
    compiled = None

BACKEND = "compiled" if compiled is not None else "pure"


def _bulk(name):
    if compiled is not None and hasattr(compiled, name):
        return getattr(compiled, name)
    return getattr(pure, name)


# scalar, arbitrary precision
profile = pure.profile
level_dists = pure.level_dists
level_of = pure.level_of
locate_cell = pure.locate_cell
cell_dist = pure.cell_dist
enum_cells = pure.enum_cells

# scalar, float64
profile_f = pure.profile_f
level_dists_f = pure.level_dists_f
locate_cell_f = pure.locate_cell_f
cell_dist_f = pure.cell_dist_f
enum_cells_f = pure.enum_cells_f
lambda_star_f = pure.lambda_star_f
cell_index_f = pure.cell_index_f

# encoding arithmetic
zigzag = pure.zigzag
unzigzag = pure.unzigzag
pair = pure.pair
unpair = pure.unpair
subset_rank = pure.subset_rank
subset_unrank = pure.subset_unrank

# bulk, dispatched
bulk_level_dists = _bulk("bulk_level_dists")
bulk_level_dists_f = _bulk("bulk_level_dists_f")
bulk_recover_exact = _bulk("bulk_recover_exact")
bulk_recover_f = _bulk("bulk_recover_f")
bulk_lambda_star_f = _bulk("bulk_lambda_star_f")
