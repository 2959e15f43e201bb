import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from arakelov.bundles import AdelicBundle  # noqa: E402
from arakelov.norms import ArchNorm, FiniteNorm, NormFamily  # noqa: E402


def build_bundle(G, fin):
    n = len(G)
    arch = ArchNorm.hermitian([[Fraction(x) for x in r] for r in G])
    return AdelicBundle(n, NormFamily(n, arch, {p: FiniteNorm.diagonal(p, w) for p, w in fin.items()}))
