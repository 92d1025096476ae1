import json
from importlib import resources

import jsonschema
import pytest
from conftest import make_model

from wickgen import pipeline
from wickgen.pipeline import basis_report, component_dict, components_of_order, enumerate_component


def schema(name):
    return json.loads(resources.files("wickgen").joinpath("schemas", name).read_text())


def test_components_of_order(scalar_grad):
    assert components_of_order(scalar_grad, 2) == [(2, 0), (1, 1), (0, 2)]
    assert components_of_order(scalar_grad, 0) == [(0, 0)]


def test_vector_kg_component(vector_kg):
    res = enumerate_component(vector_kg, (2,))
    assert len(res.terms) == 7
    assert res.monomials == 4
    # ξ is a scalar marginal: deepening adds nothing and saturates at once
    assert res.saturated and not res.ceiling_hit
    assert [d["kept"] for d in res.depths] == [7, 7, 7]


def test_scalar_gradient_components(scalar_grad):
    assert len(enumerate_component(scalar_grad, (2, 0)).terms) == 4
    assert len(enumerate_component(scalar_grad, (1, 1)).terms) == 9


def test_negative_weight_component_is_empty():
    m = make_model([("u", 0, -2), ("v", 1, 1)], [("m2", 0, 2)])
    res = enumerate_component(m, (1, 0))
    assert res.weight == -2 and res.terms == [] and res.monomials == 0
    d = component_dict(res)
    assert d["empty"] and d["terms"] == []


def test_explicit_cap_and_validation(tensor_xi):
    res = enumerate_component(tensor_xi, (2,), marginal_cap=0)
    assert res.marginal_cap == 0 and len(res.depths) == 1
    with pytest.raises(ValueError):
        enumerate_component(tensor_xi, (2,), marginal_cap=-1)


def test_ceiling_flagged_when_deepening_keeps_growing():
    m = make_model([("A", 1, 0)], [("xi", 2, -2, "symmetric", "ξ")], dim=2)
    res = enumerate_component(m, (2,))
    assert res.marginal_cap == 2
    assert res.ceiling_hit and not res.saturated
    kept = [d["kept"] for d in res.depths]
    assert kept == sorted(kept) and kept[-1] > kept[-2]


def test_report_round_trip_and_schema(vector_kg):
    comps = [component_dict(enumerate_component(vector_kg, (2,)))]
    report = basis_report(vector_kg, comps, seed=0, samples=5, marginal_cap="auto")
    text = pipeline.dumps(report)
    assert pipeline.loads(text) == report
    jsonschema.validate(report, schema("basis_report.schema.json"))
    assert "elapsed_seconds" not in text
    assert [t["index"] for t in report["components"][0]["terms"]] == list(range(1, 8))


def test_report_is_reproducible(vector_kg):
    def run():
        comps = [component_dict(enumerate_component(vector_kg, (2,), samples=5, seed=7))]
        return pipeline.dumps(basis_report(vector_kg, comps, 7, 5, "auto"))

    assert run() == run()


def test_timing_is_opt_in(vector_kg):
    res = enumerate_component(vector_kg, (1,))
    assert "elapsed_seconds" in component_dict(res, timing=True)
    assert "elapsed_seconds" not in component_dict(res)


def test_components_sorted_in_report(scalar_grad):
    comps = [component_dict(enumerate_component(scalar_grad, q)) for q in [(0, 1), (1, 0)]]
    report = basis_report(scalar_grad, comps, 0, 5, "auto")
    assert [c["Q"] for c in report["components"]] == [[1, 0], [0, 1]]


def test_model_digest_tracks_content(vector_kg, tensor_xi):
    assert pipeline.model_digest(vector_kg) == pipeline.model_digest(vector_kg)
    assert pipeline.model_digest(vector_kg) != pipeline.model_digest(tensor_xi)
