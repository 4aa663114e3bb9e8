"""Exact homological algebra for finite metagroups and their bar complexes."""

__version__ = "0.1.0"

from .exactlinalg import GF, QQ, ZZ, SparseMatrix, ring_from_name
from .metagroup import MetagroupTable, cayley_dickson, parse_table_spec, validate_metagroup
from .complex import ChainMap, FreeComplex, is_homotopy, validate_complex
from .homology import HomologyBasis, homology
from .bar import bar_boundary, bar_homotopy_s, build_bar_complex, standard_resolution
from .tensor import tensor_complexes
