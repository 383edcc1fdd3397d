"""Spider solver for exponential maps e^z + kappa whose singular value
escapes on a ray of prescribed external address and potential."""
from .address import ExternalAddress, growth, parse_address, potential_orbit, shift
from .freegroup import Word
from .rcurve import PunctureSet, RCurve, homotopy_word
from .spider import SolveOptions, solve
from .verify import real_axis_oracle, trace_ray, verify_parameter

__all__ = [
    "ExternalAddress", "growth", "parse_address", "potential_orbit", "shift",
    "Word", "PunctureSet", "RCurve", "homotopy_word",
    "SolveOptions", "solve", "real_axis_oracle", "trace_ray", "verify_parameter",
]
