"""Smoke test for the Python bindings.

Uses an installed `acimsel_py` if present, otherwise loads the library built by
`cargo build -p acimsel-python --features extension-module` (override the path
with ACIMSEL_PY_LIB). Runs under pytest or as a script.
"""

import importlib.util
import os
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]


def load():
    try:
        import acimsel_py

        return acimsel_py
    except ImportError:
        pass
    lib = pathlib.Path(os.environ.get("ACIMSEL_PY_LIB", ROOT / "target" / "debug" / "libacimsel_py.so"))
    if not lib.is_file():
        raise SystemExit(f"{lib} not found; build it with cargo build -p acimsel-python --features extension-module")
    target = pathlib.Path(tempfile.mkdtemp()) / "acimsel_py.so"
    shutil.copy(lib, target)
    spec = importlib.util.spec_from_file_location("acimsel_py", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


acimsel = load()


def test_registry_and_densities():
    assert "ex2.1/tau1" in acimsel.ids()
    assert acimsel.evaluate("ex2.1/tau1", 1.0) == 0.0
    assert acimsel.invariant_density("ex2.1/tau1") == (["0", "1/2", "1"], ["3/2", "1/2"])
    assert acimsel.invariant_density("ex2.1/tau2")[1] == ["2/3", "4/3"]


def test_selection():
    r = acimsel.select("ex2.1", "2/5")
    assert r["exact"] and r["invariance"]["sup_error"] < 1e-8
    assert r["betweenness"]["lower_violation"] < 1e-9
    r = acimsel.select("sec4", "3/4", resolution=1024, samples=10)
    assert r["invariance"]["sup_error"] < 1e-8
    assert r["envelope_crossing"] is not None
    assert len(r["graph"]) == 11


def test_slopes_figures_and_reports():
    assert acimsel.symmetric_slopes("1/10") == ["2", "18/11", "2", "22/9"]
    fig = acimsel.reproduce_figure("fig2", 10)
    assert fig["header"] == ["x", "F1", "F2", "F"]
    assert abs(fig["series"]["F"][5] - 0.5) < 1e-15
    assert acimsel.cex_report()["verdict"] == "infeasible"
    assert acimsel.claim_audit()["constant_weights"]["density"]["values"] == ["31/24", "17/24"]
    assert acimsel.check_invariance("ex2.1/remark", "ex2.1/f1")["sup_error"] > 0


def test_errors():
    for call, exc in [
        (lambda: acimsel.evaluate("nope", 0.5), KeyError),
        (lambda: acimsel.reproduce_figure("fig4"), KeyError),
        (lambda: acimsel.select("ex2.1", "3/2"), ValueError),
        (lambda: acimsel.select("ex2.1", "1/2", method="other"), ValueError),
    ]:
        try:
            call()
        except exc:
            continue
        raise AssertionError(f"expected {exc.__name__}")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for t in tests:
        t()
        print(f"ok {t.__name__}")
    print(f"{len(tests)} passed")
    sys.exit(0)
