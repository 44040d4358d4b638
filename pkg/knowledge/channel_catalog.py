"""Catalog of the builtin channels and the closed-form F* known for them."""

from __future__ import annotations

from dataclasses import dataclass, asdict, field
import math
from typing import Callable, Dict, Optional, Tuple

from utils.errors import UnknownChannelError

ClosedForm = Callable[[float], float]


@dataclass(frozen=True)
class ChannelDescriptor:
    name: str
    domain: Tuple[float, float]
    parameter: str
    reference: str
    fiducial_input: str
    optimal_povm: str
    options: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        payload = asdict(self)
        payload["domain"] = [_render(bound) for bound in self.domain]
        return payload


def _render(bound: float) -> object:
    return bound if math.isfinite(bound) else ("inf" if bound > 0 else "-inf")


CATALOG: Dict[str, ChannelDescriptor] = {
    "depolarizing": ChannelDescriptor(
        name="depolarizing",
        domain=(0.0, 1.0),
        parameter="p",
        reference="rho -> (1-p) rho + (p/3)(X rho X + Y rho Y + Z rho Z); F* = 6/(p(9-6p)), "
        "1/(p(1-p)) with a maximally entangled input and identity extension",
        fiducial_input="basis:0",
        optimal_povm="z-basis",
    ),
    "depolarizing-canonical": ChannelDescriptor(
        name="depolarizing-canonical",
        domain=(0.0, 1.0),
        parameter="p",
        reference="the depolarizing channel in its canonical Kraus form for input |0>",
        fiducial_input="basis:0",
        optimal_povm="z-basis",
    ),
    "dephasing": ChannelDescriptor(
        name="dephasing",
        domain=(0.0, math.inf),
        parameter="theta",
        reference="phase damping with coherence factor e^-2theta; F* = 4/(e^4theta - 1); "
        "identity extension gives no advantage; a tensor square on a Bell pair gives 16/(e^8theta - 1)",
        fiducial_input="plus",
        optimal_povm="x-basis",
    ),
    "random-shift": ChannelDescriptor(
        name="random-shift",
        domain=(0.0, 4.0),
        parameter="theta",
        reference="Poisson(theta) number of cyclic shifts; F* = 1/theta",
        fiducial_input="basis:0",
        optimal_povm="position",
        options={"theta_max": "upper end of the domain (default 4)", "dim": "cycle length (default k_max+2)"},
    ),
    "damping": ChannelDescriptor(
        name="damping",
        domain=(0.0, math.inf),
        parameter="theta",
        reference="oscillator damping, transmittance e^-theta; F* = N/(e^theta - 1) for Fock input |N>",
        fiducial_input="fock:1",
        optimal_povm="photon-number",
        options={"n_max": "Fock cutoff (required)"},
    ),
}


def describe(name: str) -> ChannelDescriptor:
    try:
        return CATALOG[name]
    except KeyError:
        raise UnknownChannelError(f"unknown channel {name!r}; choose from {', '.join(CATALOG)}") from None


def _descriptor_head(descriptor: str) -> Tuple[str, Optional[int]]:
    head, _, tail = descriptor.strip().lower().partition(":")
    if not tail:
        return head, None
    try:
        return head, int(tail)
    except ValueError:
        return head, None


def closed_form(name: str, extension: str, input_descriptor: str) -> Optional[ClosedForm]:
    """The known F*(theta) for a channel/extension/input triple, or None."""
    head, index = _descriptor_head(input_descriptor)
    depolarizing_like = name in ("depolarizing", "depolarizing-canonical")
    if extension == "none":
        if depolarizing_like and head in ("basis", "plus", "minus", "amplitudes"):
            return lambda p: 6.0 / (p * (9.0 - 6.0 * p))
        if name == "dephasing" and head in ("plus", "minus"):
            return lambda t: 4.0 / math.expm1(4.0 * t)
        if name == "dephasing" and head == "basis":
            return lambda t: 0.0
        if name == "damping" and head == "fock" and index is not None:
            return lambda t, n=index: n / math.expm1(t)
        if name == "random-shift" and head == "basis":
            return lambda t: 1.0 / t
    if extension == "identity" and head in ("bell", "singlet"):
        if depolarizing_like:
            return lambda p: 1.0 / (p * (1.0 - p))
        if name == "dephasing":
            return lambda t: 4.0 / math.expm1(4.0 * t)
    if extension == "square" and head in ("bell", "singlet") and name == "dephasing":
        # the pair dephases like one qubit at twice the parameter
        return lambda t: 16.0 / math.expm1(8.0 * t)
    return None
