"""End-to-end spectral classification pipeline.

Produces a three-valued verdict with an evidence trail:

* PurelyDiscrete -- the pure base has a coincidence (Dekking: the diagonal
  is the only ergodic class of the bi-substitution);
* Singular -- certified absence of a substitution-matrix eigenvalue of
  modulus sqrt(q) (applied to S_z directly: passing to the pure base can
  only change eigenvalues by zeros and roots of unity, and sqrt(q) is
  neither), optionally reinforced by a certified |theta_2| < sqrt(q);
* Inconclusive -- a sqrt(q)-modulus eigenvalue is present (the criterion is
  sufficient for singularity, not necessary, so nothing follows), or the
  enclosures could not be certified, or a precondition failed.

Precondition failures keep the verdict three-valued: they are reported as
reason "PreconditionFailed(<tag>)" under Inconclusive rather than as a
fourth verdict, and carry enough detail for callers (the CLI maps them to
a dedicated exit code).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .coincidence import bijectivity_profile, dekking_pure_discrete, ergodic_classes
from .core import Substitution, constant_length, is_aperiodic_pansiot, is_primitive, substitution_matrix
from .eigen import (
    DEFAULT_PRECISION_BITS,
    PrecisionError,
    eigenvalue_multiset,
    eigenvalues,
    has_modulus_sqrt_q,
    second_eigenvalue_below_sqrt_q,
)
from .reduction import compute_height, pure_base

PURELY_DISCRETE = "PurelyDiscrete"
SINGULAR = "Singular"
INCONCLUSIVE = "Inconclusive"

SUFFICIENCY_NOTE = "the sqrt(q) eigenvalue criterion is sufficient for singularity, but not necessary"


@dataclass(frozen=True)
class SpectralVerdict:
    """Classification outcome with its reasons and supporting evidence.

    reasons uses the fixed vocabulary DekkingCoincidence, NoSqrtQEigenvalue,
    SecondEigenvalueSmall, SqrtQPresent, NumericallyAmbiguous, and
    PreconditionFailed(<tag>).  evidence is a plain dict of domain objects
    (see report for serialization); eigenvalue_group describes the group of
    topological eigenvalues e(Z(q) x Z/hZ) by the pair (q, h), available
    whenever the pipeline got far enough to compute the height.
    """

    verdict: str
    reasons: tuple[str, ...]
    detail: str
    evidence: dict = field(compare=False)
    eigenvalue_group: Optional[tuple[int, int]]

    def precondition_failed(self) -> bool:
        return any(r.startswith("PreconditionFailed") for r in self.reasons)


def _failed(tag: str, detail: str, evidence: dict) -> SpectralVerdict:
    return SpectralVerdict(
        verdict=INCONCLUSIVE,
        reasons=(f"PreconditionFailed({tag})",),
        detail=detail,
        evidence=evidence,
        eigenvalue_group=None,
    )


def classify(z: Substitution, precision_bits: int = DEFAULT_PRECISION_BITS) -> SpectralVerdict:
    """Run the full pipeline on a substitution.

    Stages: constant length, primitivity, aperiodicity, height + pure base,
    Dekking coincidence on the pure base, then the exact sqrt(q) eigenvalue
    test on S_z.  All mathematical outcomes are encoded in the verdict; only
    resource exhaustion raises.
    """
    evidence: dict = {"alphabet_size": z.size}

    q = constant_length(z)
    if q is None:
        return _failed(
            "not-constant-length",
            "images have different lengths; this pipeline handles constant-length substitutions only",
            evidence,
        )
    evidence["q"] = q

    prim = is_primitive(z)
    evidence["primitive"] = prim.primitive
    if not prim.primitive:
        return _failed(
            "not-primitive",
            "the substitution matrix has no entrywise-positive power",
            evidence,
        )

    aper = is_aperiodic_pansiot(z)
    evidence["aperiodic"] = aper.aperiodic
    if aper.aperiodic is False:
        return _failed(
            "periodic",
            f"the substitution generates a shift-periodic sequence ({aper.reason})",
            evidence,
        )
    if aper.aperiodic is None:
        return _failed(
            "pansiot-precondition",
            f"aperiodicity undecided: {aper.reason}; refusing to classify rather than guess",
            evidence,
        )

    height = compute_height(z)
    base = pure_base(z)
    classification = ergodic_classes(base.eta)
    profile = bijectivity_profile(z)
    evidence["h"] = height.h
    evidence["pure_base_size"] = base.eta.size
    evidence["pure_base"] = base
    evidence["k"] = classification.k
    evidence["class_sizes"] = tuple(len(c) for c in classification.classes)
    evidence["transitive_size"] = len(classification.transitive)
    evidence["bijective"] = profile.bijective
    evidence["eigenvalues"] = eigenvalue_multiset(eigenvalues(substitution_matrix(z), precision_bits))
    group = (q, height.h)

    if dekking_pure_discrete(base.eta):
        return SpectralVerdict(
            verdict=PURELY_DISCRETE,
            reasons=("DekkingCoincidence",),
            detail=(
                "the pure base has a coincidence: the diagonal is the only ergodic class "
                "of its bi-substitution, so the spectrum is purely discrete (Dekking)"
            ),
            evidence=evidence,
            eigenvalue_group=group,
        )

    S = substitution_matrix(z)
    sqrt_q = has_modulus_sqrt_q(S, q, precision_bits)
    evidence["sqrt_q"] = sqrt_q

    if sqrt_q.present is False:
        reasons = ["NoSqrtQEigenvalue"]
        detail = "no eigenvalue of the substitution matrix has modulus sqrt(q), hence the spectrum is singular"
        try:
            if second_eigenvalue_below_sqrt_q(S, q, precision_bits):
                reasons.append("SecondEigenvalueSmall")
                detail += "; moreover the second-largest eigenvalue modulus is certified below sqrt(q)"
        except PrecisionError:
            pass
        return SpectralVerdict(
            verdict=SINGULAR,
            reasons=tuple(reasons),
            detail=detail,
            evidence=evidence,
            eigenvalue_group=group,
        )

    if sqrt_q.present is True:
        return SpectralVerdict(
            verdict=INCONCLUSIVE,
            reasons=("SqrtQPresent",),
            detail=(
                f"an eigenvalue of modulus sqrt({q}) is present ({sqrt_q.detail}); "
                + SUFFICIENCY_NOTE
            ),
            evidence=evidence,
            eigenvalue_group=group,
        )

    return SpectralVerdict(
        verdict=INCONCLUSIVE,
        reasons=("NumericallyAmbiguous",),
        detail=(
            f"modulus enclosures could not certify sqrt({q}) presence or absence "
            f"at the precision budget; {SUFFICIENCY_NOTE}"
        ),
        evidence=evidence,
        eigenvalue_group=group,
    )
