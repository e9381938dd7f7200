"""
📊 Function Service - step functions on [0, 1]
"""

from . import BaseService, ServiceResult
from ..config_schema import RunConfig
from ..core.errors import InvariantViolationError
from ..core.simplefn import (
    SimpleFunction,
    distribution,
    heart_membership,
    luxemburg_norm,
    modular,
    rearrange,
)


def _piece_rows(f: SimpleFunction):
    return [
        {"start": str(s), "end": str(e), "measure": str(e - s), "value": v}
        for s, e, v in f.pieces()
    ]


class FunctionService(BaseService):
    """Commands of the ``fn`` group."""

    def __init__(self):
        super().__init__("fn")
        self.commands = {
            "rearrange": self.rearrange,
            "norm": self.norm,
            "modular": self.modular,
        }

    def rearrange(self, config: RunConfig) -> ServiceResult:
        params = config.typed_params()
        f = SimpleFunction.from_triples(params.function)
        f_star = rearrange(f)
        profile = distribution(f)
        if distribution(f_star) != profile:
            raise InvariantViolationError("function", "rearrangement is not equimeasurable with |f|")
        return self._success_result(
            data={"rearranged": f_star.to_triples(), "distribution": profile.to_dict()},
            message=f"f* has {len(f_star)} pieces, support {profile.support}",
            rows=_piece_rows(f_star),
            summary={"pieces": len(f_star), "sup": f_star.values[0], "support": str(profile.support)},
        )

    def norm(self, config: RunConfig) -> ServiceResult:
        phi = config.phi.build()
        params = config.typed_params()
        f = SimpleFunction.from_triples(params.function)
        value = luxemburg_norm(phi, f, params.tol)
        data = {
            "norm": value,
            "modular": modular(phi, f),
            "in_heart": heart_membership(phi, f),
            "tol": params.tol,
        }
        return self._success_result(
            data=data,
            message=f"||f|| in {phi.label} = {value:.12g}",
            rows=[data],
            summary={"norm": value},
        )

    def modular(self, config: RunConfig) -> ServiceResult:
        phi = config.phi.build()
        params = config.typed_params()
        f = SimpleFunction.from_triples(params.function)
        value = modular(phi, f)
        data = {"modular": value, "in_heart": heart_membership(phi, f)}
        return self._success_result(
            data=data,
            message=f"modular in {phi.label} = {value:.12g}",
            rows=[data],
            summary={"modular": value},
        )
