import pytest

from pftau.hub import (Experiment, acceptance_experiments, bkp_normalization,
                       ratio_experiments, run_experiment, run_suite)
from pftau.moments import EnsembleSpec
from pftau.symfun import CouplingSeq, c_factor


def test_bkp_normalization_single_location():
    spec = EnsembleSpec("OE", 3, 1, CouplingSeq.of(0.2, 0.1), CouplingSeq.of(0.0, 0.4))
    norm = bkp_normalization(spec)
    assert norm == pytest.approx((-1.0) ** 3 * c_factor(spec.t, spec.s))
    even = EnsembleSpec("SE", 1, 1)   # charge 2: sign is +1
    assert bkp_normalization(even) == 1.0


def test_series_vs_oracle_verdict_and_reporting():
    e = Experiment("demo", "series-vs-oracle-ratio",
                   spec=EnsembleSpec("SE", 1, 0, CouplingSeq.of(0.3)),
                   tolerance=1e-5, cutoff=12)
    v = run_experiment(e)
    assert v.passed and v.margin < 1e-8
    assert "bkp_normalization" in v.details
    assert v.details["imag_ratio"] < 1e-10


def test_degenerate_base_falls_back():
    # OE with N=1, L=1 has a vanishing undeformed partition function
    e = Experiment("deg", "series-vs-oracle-ratio",
                   spec=EnsembleSpec("OE", 1, 1, CouplingSeq.of(0.3)),
                   tolerance=1e-4, cutoff=12)
    v = run_experiment(e)
    assert v.passed
    assert v.details["base_t"] != ()


def test_unknown_comparison_is_a_failed_verdict():
    v = run_experiment(Experiment("bogus", "no-such-kind"))
    assert not v.passed and "unknown comparison" in v.error


def test_validation_failure_becomes_verdict():
    e = Experiment("reject", "series-vs-oracle-ratio",
                   spec=EnsembleSpec("GinSE", 1, 0, CouplingSeq.of(0.1),
                                     CouplingSeq.of(0.0, 0.4)))
    v = run_experiment(e)
    assert not v.passed
    assert "ValidationError" in v.error


def test_suite_determinism():
    exps = [Experiment("d1", "discrete-exact", spec=EnsembleSpec("OE", 1),
                       tolerance=1e-10, seed=5, params=(("trials", 6),)),
            Experiment("g1", "group-series-vs-mc", cutoff=6, samples=4000, seed=5,
                       params=(("group", "orthogonal"), ("size", 3), ("t", (0.2,)),
                               ("predicates", (((2,), 1.0),))))]
    a = run_suite(exps)
    b = run_suite(exps)
    assert [(v.name, v.passed, v.margin) for v in a] == [(v.name, v.passed, v.margin) for v in b]


def test_kernel_experiment_records_variant():
    e = Experiment("kern", "kernel-vs-oracle",
                   spec=EnsembleSpec("OE", 2, 0, CouplingSeq.of(0.2)),
                   tolerance=1e-4,
                   params=(("p", (0.1, -0.1)), ("p_ref", (0.08, -0.06))))
    v = run_experiment(e)
    assert v.passed
    assert v.details["validating_variant"] == "abs"
    assert not v.details["variants"]["sgn"]["validates"]


def test_hirota_experiment_shape():
    e = Experiment("hir", "hirota-decay", spec=EnsembleSpec("SE", 1, 0, CouplingSeq.of(0.2)),
                   params=(("alpha", 8.0), ("beta", 10.0), ("cutoffs", (8, 10, 12)),
                           ("min_factor", 2.0)))
    v = run_experiment(e)
    assert v.passed
    assert len(v.details["residuals"]) == 3
    assert all(f >= 2.0 for f in v.details["decay_factors"])


def test_ratio_experiment_list_covers_spec_grid():
    exps = ratio_experiments()
    names = {e.name for e in exps}
    assert len(exps) == 4 * 2 * 2 * 2 + 2
    assert "ratio-GinOE-N2-L1-tB" in names
    assert "ratio-SE-N1-L0-sNZ" in names


def test_acceptance_experiment_names_unique():
    exps = acceptance_experiments()
    names = [e.name for e in exps]
    assert len(set(names)) == len(names)


def test_wave_experiment_with_s_side():
    e = Experiment("wave-s", "wave-poly",
                   spec=EnsembleSpec("SE", 1, 0, CouplingSeq.of(0.2), CouplingSeq.of(0.0, 0.4)),
                   tolerance=1e-4, cutoff=12, params=(("points", (2.0, 3.0, 5.0)),))
    v = run_experiment(e)
    assert v.passed
    # both wave constructions are polynomials of the charge degree; their
    # literal pointwise equality is only reported
    assert v.details["fit_deviation_s_side"] < 1e-8
    assert v.details["two_sided_gap"] is not None


def test_degenerate_base_n3():
    v = run_experiment(Experiment("n3", "series-vs-oracle-ratio",
                                  spec=EnsembleSpec("GinOE", 3, 1, CouplingSeq.of(0.2)),
                                  tolerance=1e-4, cutoff=12))
    assert v.passed
    assert v.details["base_t"] == (0.05,)
