"""Bayes factors against the unconstrained model, and everything built on them.

Each stated hypothesis H_t with equality part (R_E, r_E) and inequality
part (R_I, r_I) gets a Bayes factor B_tu against the unconstrained model
that factorizes as

    B_tu = (f_E / c_E) * (f_IE / c_IE)

where f_E is the posterior marginal density of xi_E at r_E, c_E the
corresponding density under the minimal-fraction prior relocated to the
constraint boundary, f_IE the posterior probability of the inequality
region (conditioned on the equalities when both parts are present) and
c_IE the same probability under the relocated prior.  Densities are
handled in log space throughout; only the probability factors ever carry
Monte Carlo error, and single-row inequality systems take an exact CDF
path.  The automatic complement covers whatever region the stated
inequality-only hypotheses leave free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, ndtri

from .constraints import (
    TransformedSystem,
    build_transform,
    conditional_xiI,
    fractional_posterior_beta,
    marginal_xiE,
    minimal_fraction,
)
from .errors import BfregError, InvalidInputError, NumericError
from .hyparse import (
    ConstraintSystem,
    is_exploratory,
    parse_hypotheses,
    render,
    validate,
)
from .model import RegressionFit
from .numkernel import (
    MultivariateT,
    ProbEstimate,
    _sample_chunks,
    derived_seed,
    mvt_constraint_prob,
    mvt_logpdf,
    pseudo_inverse,
)

_Z90 = float(ndtri(0.95))

# When the stated inequality-only hypotheses leave less prior mass than
# this (plus Monte Carlo slack) uncovered, they exhaust the parameter
# space and no complement is added.
_EXHAUSTION_TOL = 1e-3


@dataclass(frozen=True)
class BFComponents:
    """One hypothesis' Bayes factor against the unconstrained model.

    ``c_e``/``f_e`` are prior/posterior densities (None without an
    equality part), ``c_ie``/``f_ie`` prior/posterior constraint
    probabilities (None without an inequality part).  ``ci90`` is a 90%
    interval for ``bf`` when Monte Carlo error is present, else None.
    """

    label: str
    c_e: float | None
    f_e: float | None
    c_ie: ProbEstimate | None
    f_ie: ProbEstimate | None
    log_bf: float
    bf: float
    ci90: tuple | None = None

    @property
    def uses_mc(self) -> bool:
        return any(
            p is not None and not p.exact for p in (self.c_ie, self.f_ie)
        )


@dataclass(frozen=True)
class TestResult:
    """Outcome of a confirmatory test of stated hypotheses."""

    labels: tuple
    hypothesis_texts: tuple
    components: tuple
    prior_probs: np.ndarray
    post_probs: np.ndarray
    bf_matrix: np.ndarray
    seed: int
    mcrep: int


@dataclass(frozen=True)
class ExploratoryResult:
    """Per-coefficient {< 0, = 0, > 0} posterior probability table."""

    coef_names: tuple
    post_probs: np.ndarray
    components: tuple
    bf_matrices: dict
    seed: int
    mcrep: int


def posterior_probabilities(bayes_factors, prior_probs=None) -> np.ndarray:
    """Normalize Bayes factors and prior weights into posterior probabilities.

    ``Pr(H_t | y) = B_tu w_t / sum_s B_su w_s``.  ``prior_probs`` may be
    None or "equal" for uniform weights; weights must be nonnegative and
    not all zero.  The result sums to 1.
    """
    b = np.atleast_1d(np.asarray(bayes_factors, dtype=float))
    if b.ndim != 1 or b.size == 0:
        raise InvalidInputError("need a nonempty vector of Bayes factors")
    if np.any(b < 0) or not np.all(np.isfinite(b)):
        raise InvalidInputError("Bayes factors must be finite and nonnegative")
    if prior_probs is None or (
        isinstance(prior_probs, str) and prior_probs == "equal"
    ):
        w = np.ones_like(b)
    else:
        w = np.atleast_1d(np.asarray(prior_probs, dtype=float))
        if w.shape != b.shape:
            raise InvalidInputError(
                f"got {w.size} prior weights, expected {b.size}"
            )
        if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
            raise InvalidInputError(
                "prior weights must be nonnegative and not all zero"
            )
    with np.errstate(divide="ignore"):
        score = np.log(b) + np.log(w)
    if np.all(np.isneginf(score)):
        raise NumericError("all hypotheses have zero weighted Bayes factor")
    p = np.exp(score - logsumexp(score))
    return p / p.sum()


def bf_matrix(components) -> np.ndarray:
    """Pairwise Bayes factors ``B[i, j] = bf_i / bf_j``."""
    b = np.array(
        [c.bf if isinstance(c, BFComponents) else float(c) for c in components]
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        return b[:, None] / b[None, :]


def _ratio_ci90(bf, f_est: ProbEstimate, c_est: ProbEstimate):
    """Delta-method 90% interval on log B for a ratio of MC proportions."""
    if not (f_est.std_error > 0 or c_est.std_error > 0):
        return None
    if f_est.value <= 0 or bf <= 0:
        return None
    var = 0.0
    if f_est.std_error > 0:
        var += (f_est.std_error / f_est.value) ** 2
    if c_est.std_error > 0:
        var += (c_est.std_error / c_est.value) ** 2
    h = _Z90 * math.sqrt(var)
    return (bf * math.exp(-h), bf * math.exp(h))


def _check_prior_prob(est: ProbEstimate, label: str, what: str):
    if est.value <= 0.0:
        raise NumericError(
            f"{label}: prior {what} is numerically zero; the hypothesis "
            "sits in the extreme tail of the implicit prior (increase "
            "mcrep or reconsider the constraint)"
        )


def bf_unconstrained(
    fit: RegressionFit,
    cs: ConstraintSystem,
    mcrep: int = 1_000_000,
    seed: int = 0,
    *,
    df_as_printed: bool = False,
) -> BFComponents:
    """Bayes factor of one constrained hypothesis against the unconstrained.

    Dispatches on the constraint structure: equality-only hypotheses are a
    ratio of analytic densities, inequality-only hypotheses a ratio of
    region probabilities, and mixed hypotheses the product of both with
    the probabilities conditioned on the equality slice.  Monte Carlo
    draws for numerator and denominator use independent streams derived
    from ``seed``.
    """
    ts = build_transform(cs, fit)
    b_min = minimal_fraction(fit)
    label = cs.label

    c_e = f_e = None
    c_ie = f_ie = None
    log_bf = 0.0

    if cs.q_E:
        post = marginal_xiE(fit, ts, 1.0)
        prior = marginal_xiE(fit, ts, b_min).relocate(cs.r_E)
        log_f = mvt_logpdf(cs.r_E, post)
        log_c = mvt_logpdf(cs.r_E, prior)
        f_e = math.exp(log_f)
        c_e = math.exp(log_c)
        log_bf += log_f - log_c

    if cs.q_I:
        if cs.q_E:
            cond_post = conditional_xiI(
                fit, ts, 1.0, cs.r_E, df_as_printed=df_as_printed
            )
            f_ie = mvt_constraint_prob(
                cond_post, ts.Rtilde_I, ts.rtilde_I, mcrep, derived_seed(seed, 1)
            )
            cond_prior = conditional_xiI(
                fit, ts, b_min, ts.xi_hat[: cs.q_E], df_as_printed=df_as_printed
            )
            c_ie = mvt_constraint_prob(
                cond_prior, ts.Rtilde_I, ts.r_star, mcrep, derived_seed(seed, 2)
            )
        else:
            post = fractional_posterior_beta(fit, 1.0)
            f_ie = mvt_constraint_prob(
                post, cs.R_I, cs.r_I, mcrep, derived_seed(seed, 1)
            )
            prior = fractional_posterior_beta(fit, b_min).relocate(ts.mu0)
            c_ie = mvt_constraint_prob(
                prior, cs.R_I, cs.r_I, mcrep, derived_seed(seed, 2)
            )
        _check_prior_prob(c_ie, label, "constraint probability")
        with np.errstate(divide="ignore"):
            log_bf += float(np.log(f_ie.value)) - math.log(c_ie.value)

    bf = math.exp(log_bf) if log_bf > -math.inf else 0.0
    if not math.isfinite(bf) and log_bf < math.inf:
        bf = math.inf
    ci90 = None
    if f_ie is not None and c_ie is not None:
        ci90 = _ratio_ci90(bf, f_ie, c_ie)
    return BFComponents(label, c_e, f_e, c_ie, f_ie, log_bf, bf, ci90)


def _union_prob(dist: MultivariateT, systems, n_draws: int, seed):
    """Shared-draw Monte Carlo estimate of Pr(any system satisfied)."""
    hits = 0
    for chunk in _sample_chunks(dist, n_draws, seed):
        sat = np.zeros(chunk.shape[0], dtype=bool)
        for cs in systems:
            sat |= np.all(chunk @ cs.R_I.T > cs.r_I, axis=1)
        hits += int(sat.sum())
    p = hits / n_draws
    return float(p), math.sqrt(p * (1.0 - p) / n_draws)


def bf_complement(
    fit: RegressionFit,
    systems,
    components,
    mcrep: int = 1_000_000,
    seed: int = 0,
):
    """Bayes factor of the complement of the stated hypotheses.

    Equality-constrained hypotheses occupy measure-zero slices and are
    ignored; the complement divides what the inequality-only hypotheses
    leave over: ``B_cu = (1 - U_f) / (1 - U_c)`` with U the posterior or
    prior probability of the union of their regions (shared draws).  With
    no inequality-only hypothesis at all the complement is the
    unconstrained model itself (B = 1).  Returns None when the stated
    hypotheses exhaust the space.
    """
    ineq = [
        (cs, comp)
        for cs, comp in zip(systems, components)
        if cs.q_E == 0 and cs.q_I > 0
    ]
    if not ineq:
        one = ProbEstimate(1.0, 0.0, True, 0)
        return BFComponents("Hc", None, None, one, one, 0.0, 1.0, None)
    if len(ineq) == 1:
        cs, comp = ineq[0]
        u_f, u_c = comp.f_ie, comp.c_ie
        exact_f, exact_c = u_f.exact, u_c.exact
        nd_f, nd_c = u_f.n_draws, u_c.n_draws
        Uf, se_f = u_f.value, u_f.std_error
        Uc, se_c = u_c.value, u_c.std_error
    else:
        post = fractional_posterior_beta(fit, 1.0)
        Uf, se_f = _union_prob(
            post, [cs for cs, _ in ineq], mcrep, derived_seed(seed, 1)
        )
        stack_R = np.vstack([cs.R_I for cs, _ in ineq])
        stack_r = np.concatenate([cs.r_I for cs, _ in ineq])
        center = pseudo_inverse(stack_R) @ stack_r
        prior = fractional_posterior_beta(fit, minimal_fraction(fit)).relocate(
            center
        )
        Uc, se_c = _union_prob(
            prior, [cs for cs, _ in ineq], mcrep, derived_seed(seed, 2)
        )
        exact_f = exact_c = False
        nd_f = nd_c = mcrep

    if 1.0 - Uc < _EXHAUSTION_TOL + 3.0 * se_c:
        return None
    f_ie = ProbEstimate(1.0 - Uf, se_f, exact_f, nd_f)
    c_ie = ProbEstimate(1.0 - Uc, se_c, exact_c, nd_c)
    with np.errstate(divide="ignore"):
        log_bf = float(np.log(f_ie.value)) - math.log(c_ie.value)
    bf = math.exp(log_bf) if log_bf > -math.inf else 0.0
    return BFComponents(
        "Hc", None, None, c_ie, f_ie, log_bf, bf, _ratio_ci90(bf, f_ie, c_ie)
    )


def _complement_text(n_hypotheses: int) -> str:
    if n_hypotheses == 1:
        return "Not H1"
    return f"Not H1-H{n_hypotheses}"


def _resolve_priors(prior_probs, n_components: int, n_stated: int):
    if prior_probs is None or (
        isinstance(prior_probs, str) and prior_probs == "equal"
    ):
        return np.full(n_components, 1.0 / n_components)
    w = np.atleast_1d(np.asarray(prior_probs, dtype=float))
    if w.shape != (n_components,):
        detail = (
            f"{n_stated} stated hypotheses plus the automatic complement"
            if n_components != n_stated
            else f"{n_stated} stated hypotheses"
        )
        raise InvalidInputError(
            f"got {w.size} prior weights, expected {n_components} ({detail})"
        )
    if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
        raise InvalidInputError("prior weights must be nonnegative and not all zero")
    return w / w.sum()


def test_hypotheses(
    fit: RegressionFit,
    hypothesis_text: str,
    prior_probs=None,
    mcrep: int = 1_000_000,
    seed: int = 0,
    *,
    df_as_printed: bool = False,
):
    """Run a full confirmatory (or exploratory) test.

    Parses and validates the hypothesis text, computes every Bayes factor
    against the unconstrained model, appends the automatic complement
    when the stated hypotheses do not exhaust the space, and converts to
    posterior probabilities.  The same seed yields a bit-identical
    result.  The text ``"exploratory"`` delegates to
    :func:`exploratory_test`.
    """
    mcrep = int(mcrep)
    if mcrep < 1:
        raise InvalidInputError("mcrep must be positive")
    if is_exploratory(hypothesis_text):
        return exploratory_test(fit, mcrep=mcrep, seed=seed)
    systems = parse_hypotheses(hypothesis_text, fit.coef_names)
    if not systems:
        raise InvalidInputError("no hypotheses given")
    for cs in systems:
        validate(cs)
    components = []
    for i, cs in enumerate(systems):
        try:
            components.append(
                bf_unconstrained(
                    fit,
                    cs,
                    mcrep,
                    derived_seed(seed, 10, i),
                    df_as_printed=df_as_printed,
                )
            )
        except BfregError as exc:
            if str(exc).startswith(f"{cs.label}:"):
                raise
            raise type(exc)(f"{cs.label}: {exc}") from exc
    complement = bf_complement(
        fit, systems, components, mcrep, derived_seed(seed, 20)
    )
    texts = [render(cs) for cs in systems]
    if complement is not None:
        components.append(complement)
        texts.append(_complement_text(len(systems)))
    labels = tuple(c.label for c in components)
    w = _resolve_priors(prior_probs, len(components), len(systems))
    post = posterior_probabilities([c.bf for c in components], w)
    return TestResult(
        labels=labels,
        hypothesis_texts=tuple(texts),
        components=tuple(components),
        prior_probs=w,
        post_probs=post,
        bf_matrix=bf_matrix(components),
        seed=seed,
        mcrep=mcrep,
    )


def exploratory_test(
    fit: RegressionFit, mcrep: int = 1_000_000, seed: int = 0
) -> ExploratoryResult:
    """For every coefficient, test {< 0, = 0, > 0} with equal priors.

    All three Bayes factors take exact paths (1-d densities and CDFs), so
    the probability rows carry no Monte Carlo error, each row sums to 1,
    and no complement applies (the three hypotheses exhaust the line).
    """
    k = fit.k
    rows = []
    comps_all = []
    matrices = {}
    for j, name in enumerate(fit.coef_names):
        e = np.zeros((1, k))
        e[0, j] = 1.0
        zero1 = np.zeros(1)
        empty_R = np.zeros((0, k))
        empty_r = np.zeros(0)
        triple = (
            ConstraintSystem("H1", f"{name}<0", empty_R, empty_r, -e, zero1),
            ConstraintSystem("H2", f"{name}=0", e, zero1, empty_R, empty_r),
            ConstraintSystem("H3", f"{name}>0", empty_R, empty_r, e, zero1),
        )
        comps = tuple(
            bf_unconstrained(fit, cs, mcrep, derived_seed(seed, 30, j, i))
            for i, cs in enumerate(triple)
        )
        rows.append(posterior_probabilities([c.bf for c in comps]))
        comps_all.append(comps)
        matrices[name] = bf_matrix(comps)
    return ExploratoryResult(
        coef_names=fit.coef_names,
        post_probs=np.array(rows),
        components=tuple(comps_all),
        bf_matrices=matrices,
        seed=seed,
        mcrep=int(mcrep),
    )
