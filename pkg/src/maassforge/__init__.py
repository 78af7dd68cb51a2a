"""MaassForge - exact holomorphic parts of weight one harmonic Maass forms."""

from .errors import (
    ConductorError,
    ConsistencyError,
    DomainError,
    MaassForgeError,
    PrecisionShortfallError,
    UsageError,
)
from .exact import Cyclotomic, LogValue, QuadElem
from .mockform import MockPlusForm, holo_coefficient, ttheta_plus, vartheta
from .qseries import QSeries, VVForm, mock_theta_plus
from .quadfield import IdealLattice, QuadLattice, fundamental_unit
from .scalarform import RayCharacter, bold_c_phi, c_plus_phi, f_phi, ray_characters
from .weilrep import SL2Elem, WeilRepresentation

__all__ = [
    "ConductorError",
    "ConsistencyError",
    "Cyclotomic",
    "DomainError",
    "IdealLattice",
    "LogValue",
    "MaassForgeError",
    "MockPlusForm",
    "PrecisionShortfallError",
    "QSeries",
    "QuadElem",
    "QuadLattice",
    "RayCharacter",
    "SL2Elem",
    "UsageError",
    "VVForm",
    "WeilRepresentation",
    "bold_c_phi",
    "c_plus_phi",
    "f_phi",
    "fundamental_unit",
    "holo_coefficient",
    "mock_theta_plus",
    "ray_characters",
    "ttheta_plus",
    "vartheta",
]
