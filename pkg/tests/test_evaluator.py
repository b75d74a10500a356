import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from genjudge.classifier import CvConfig
from genjudge.errors import LabelConflict, OutOfRange, StageError
from genjudge.evaluator import (
    ComparisonRow,
    ComparisonTable,
    EvaluationConfig,
    EvaluationReport,
    assemble_real_fake,
    build_kernel,
    compare_generators,
    comparison_csv,
    error_score,
    evaluate_generator,
    family_of,
    rank_rows,
)
from genjudge.generators import GeneratorSpec, sample_fake_set
from genjudge.graph import Dataset, Label, RngSeed, save_dataset
from genjudge.kernel import check_psd


@pytest.fixture(scope="module")
def real():
    return sample_fake_set(GeneratorSpec.ba(40, 2), 16, RngSeed(11)).with_label(Label.REAL)


def small_config(**kw):
    base = dict(trials=2, cv=CvConfig(folds=4), master_seed=RngSeed(5))
    base.update(kw)
    return EvaluationConfig(**base)


@pytest.mark.parametrize("acc, err", [(0.57, 0.07), (0.71, 0.21), (0.784, 0.284),
                                      (0.74, 0.24), (0.887, 0.387), (0.996, 0.496),
                                      (0.5, 0.0), (0.0, 0.5), (1.0, 0.5)])
def test_error_score_examples(acc, err):
    assert error_score(acc) == pytest.approx(err, abs=1e-12)


@given(st.floats(0.0, 1.0))
def test_error_score_symmetric_and_bounded(acc):
    assert error_score(acc) == pytest.approx(error_score(1.0 - acc), abs=1e-12)
    assert 0.0 <= error_score(acc) <= 0.5


@pytest.mark.parametrize("acc", [-0.01, 1.01, float("nan")])
def test_error_score_out_of_range(acc):
    with pytest.raises(OutOfRange):
        error_score(acc)


def test_assemble_labels_and_order(real):
    fake = sample_fake_set(GeneratorSpec.er(20, 0.2), 4, RngSeed(1))
    merged, y = assemble_real_fake(real, fake)
    assert len(merged) == len(real) + 4
    assert y.tolist() == [1.0] * len(real) + [-1.0] * 4
    assert merged.graphs[: len(real)] == real.graphs


def test_assemble_label_conflicts(real):
    fake = sample_fake_set(GeneratorSpec.er(20, 0.2), 4, RngSeed(1))
    with pytest.raises(LabelConflict):
        assemble_real_fake(fake, fake)
    with pytest.raises(LabelConflict):
        assemble_real_fake(real, real)
    with pytest.raises(LabelConflict):
        assemble_real_fake(real, Dataset(fake.graphs))


@pytest.mark.parametrize("kernel", ["base", "deep"])
@pytest.mark.parametrize("normalize", ["center", "cosine", "none"])
def test_build_kernel_psd(kernel, normalize, rng):
    f = rng.dirichlet(np.ones(8), size=12)
    k = build_kernel(f, EvaluationConfig(kernel=kernel, normalize=normalize))
    assert k.values.shape == (12, 12)
    assert (k.values == k.values.T).all()
    assert check_psd(k) >= -1e-8 * max(1.0, float(np.diag(k.values).max()))


def test_identical_copies_give_chance(real):
    rep = evaluate_generator(real, GeneratorSpec.rewire(0.0), small_config())
    assert rep.per_trial == [(0.5, 0.0)] * 2
    assert rep.mean_error == 0.0


def test_evaluate_deterministic(real):
    a = evaluate_generator(real, GeneratorSpec.er(40, 0.1), small_config())
    b = evaluate_generator(real, GeneratorSpec.er(40, 0.1), small_config())
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
    assert len(a.per_trial) == 2
    assert a.dataset_sizes == (16, 16)


def test_evaluate_independent_of_threads(real):
    a = evaluate_generator(real, GeneratorSpec.caveman(5, 8), small_config(), threads=1)
    b = evaluate_generator(real, GeneratorSpec.caveman(5, 8), small_config(), threads=2)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())


def test_report_schema(real):
    d = evaluate_generator(real, GeneratorSpec.caveman(5, 8), small_config(), "cave").to_dict()
    for key in ("generator", "family", "config", "per_trial", "mean_accuracy", "mean_error",
                "std_error", "dataset_sizes", "seed", "version"):
        assert key in d
    assert d["generator"] == "cave"
    assert d["family"] == "ba"
    assert d["dataset_sizes"] == {"real": 16, "fake": 16}
    assert d["seed"] == 5
    assert d["mean_error"] >= 0.4  # cliques are trivially told apart from BA


def test_stage_named_on_failure(real, tmp_path):
    save_dataset(sample_fake_set(GeneratorSpec.ba(40, 2), 3, RngSeed(0)), tmp_path)
    with pytest.raises(StageError) as info:
        evaluate_generator(real, GeneratorSpec.external(tmp_path), small_config())
    assert info.value.stage == "generate"
    assert "NotEnoughExternalGraphs" in str(info.value)


def test_family_of():
    ds = sample_fake_set(GeneratorSpec.ba(10, 2), 2, RngSeed(0))
    assert family_of(ds) == "ba"
    mixed = Dataset(ds.graphs, source_tags=("ba(n=10,m=2)", "er(n=10,p=0.1)"))
    assert family_of(mixed) == "unknown"


def _report(name, acc):
    return EvaluationReport(name, "fam", [(acc, error_score(acc))], np.zeros((2, 2), int),
                            EvaluationConfig(), (1, 1))


def test_rank_by_error_then_name():
    rows = [ComparisonRow("zeta", _report("zeta", 0.6)), ComparisonRow("alpha", _report("alpha", 0.4)),
            ComparisonRow("mid", _report("mid", 0.55)), ComparisonRow("bad", failure="boom")]
    ranked = [r.name for r in rank_rows(rows)]
    assert ranked == ["mid", "alpha", "zeta", "bad"]


def test_csv_cells_and_failed():
    table = ComparisonTable("ba", rank_rows([ComparisonRow("g1", _report("g1", 0.57)),
                                             ComparisonRow("g2", failure="x")]))
    assert table.to_csv() == "family,g1,g2\nba,57.0|0.070,FAILED\n"
    assert table.to_csv("accuracy") == "family,g1,g2\nba,57.0,FAILED\n"
    assert table.to_csv("error") == "family,g1,g2\nba,0.070,FAILED\n"
    assert table.ranking == ["g1"]
    assert "FAILED" in table.format()


def test_csv_several_families():
    t1 = ComparisonTable("a", [ComparisonRow("x", _report("x", 0.5))])
    t2 = ComparisonTable("b", [ComparisonRow("y", _report("y", 0.9))])
    assert comparison_csv([t1, t2], "accuracy") == "family,x,y\na,50.0,\nb,,90.0\n"


def test_compare_ranks_copies_first(real, tmp_path):
    save_dataset(sample_fake_set(GeneratorSpec.ba(40, 2), 2, RngSeed(0)), tmp_path)
    table = compare_generators(real, [("cave", GeneratorSpec.caveman(5, 8)),
                                      ("copy", GeneratorSpec.rewire(0.0)),
                                      ("short", GeneratorSpec.external(tmp_path))], small_config())
    assert table.ranking == ["copy", "cave"]
    assert table.rows[-1].name == "short" and table.rows[-1].failed
