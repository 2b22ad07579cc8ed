import warnings

import pytest

from catk.complex import ComplexPoint, build_complex, polygon_document
from catk.homology import CycleCurve, chain_complex, curve_interior
from catk.region import Region
from catk.scenario import _build_region, _seams, annulus_scenario, build_example_tripod, validate_document
from catk.subdivide import subdivide
from catk.verify import Tolerances


@pytest.fixture(autouse=True)
def _quiet_ladder_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="ladder clipped")
        yield


def square_complex(side=3.0, kappa=0.0):
    return build_complex(polygon_document(kappa, [(0, 0), (side, 0), (side, side), (0, side)]))


@pytest.fixture(scope="session")
def square():
    X = square_complex()
    S = subdivide(X, 0.25)
    return S, Region.all(S), Tolerances.defaults(S)


class Tripod:
    def __init__(self, h=0.25):
        self.sc = validate_document(build_example_tripod(h=h))
        self.X = self.sc.complex
        seams, idx = _seams(self.sc)
        self.S = subdivide(self.X, h, seams)
        self.gamma = CycleCurve.from_vertices(self.S, self.S.seams[idx])
        self.C = chain_complex(self.S)
        self.cls = curve_interior(self.S, self.gamma, self.C)
        self.full = Region.all(self.S)
        self.tol = Tolerances.defaults(self.S)

    def point(self, face, x, y):
        return self.S.from_parent(self.X.locate(("face", face, [x, y])))

    def spine(self, t):
        return self.S.from_parent(ComplexPoint.on_edge(0, t))

    def spine_vertices(self):
        return [v for _, v in self.S.edge_points[0]]


@pytest.fixture(scope="session")
def tripod():
    return Tripod()


@pytest.fixture(scope="session")
def annulus():
    sc = validate_document(annulus_scenario())
    seams, _ = _seams(sc)
    S = subdivide(sc.complex, sc.h, seams)
    E = _build_region(sc, S, None)
    return S, E, Tolerances.defaults(S)
