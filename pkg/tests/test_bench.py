import importlib.util
from pathlib import Path

BENCH = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"


def test_benchmark_backends_agree(tmp_path, capsys):
    spec = importlib.util.spec_from_file_location("bench_kernels", BENCH)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    out = tmp_path / "b.json"
    assert mod.main(["--repeat", "1", "--geometry-levels", "6", "--dp-levels", "5",
                     "--json", str(out)]) == 0
    assert out.exists()
    assert "cover DP" in capsys.readouterr().out
