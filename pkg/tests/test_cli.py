import json
import subprocess
import sys
from importlib import resources

import pytest

from maskadvisor.cli import main
from maskadvisor.datasets import example_configurations
from maskadvisor.masking import MaskingConfiguration, MaskingFunction, dump_configurations

DATA = str(resources.files("maskadvisor").joinpath("data", "running_example.csv"))
EXCERPT = str(resources.files("maskadvisor").joinpath("data", "excerpt.csv"))


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "configs.json"
    p.write_text(dump_configurations(example_configurations()))
    return str(p)


def _advise(tmp_path, cfg_file, *extra, name="report.json"):
    out = tmp_path / name
    code = main(["advise", "--data", DATA, "--label", "Health", "--configs", cfg_file,
                 "--out", str(out), *extra])
    assert code == 0
    return out


def test_summarize(tmp_path):
    out = tmp_path / "s.json"
    assert main(["summarize", "--data", DATA, "--label", "Health", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["marginals"]["Age"] == {"10": 4, "17": 12, "43": 4, "55": 30, "60": 20,
                                       "65": 10, "75": 10, "80": 10}
    first = out.read_bytes()
    main(["summarize", "--data", DATA, "--label", "Health", "--out", str(out)])
    assert out.read_bytes() == first
    manifest = json.loads((tmp_path / "s.json.manifest.json").read_text())
    assert manifest["command"] == "summarize" and manifest["outputs"] == [str(out)]


def test_summarize_empty(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("a,Health\n")
    assert main(["summarize", "--data", str(empty), "--label", "Health",
                 "--out", str(tmp_path / "s.json")]) == 1
    assert "empty dataset" in capsys.readouterr().err


def test_advise_truth_selects_identity(tmp_path, cfg_file, capsys):
    out = _advise(tmp_path, cfg_file, "--against", "truth")
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[-1] == "selected: cfg-identity"
    doc = json.loads(out.read_text())
    per = {c["config_id"]: c for c in doc["per_config"]}
    assert per["cfg-identity"]["total_deviation"] == 0
    age = per["cfg-young-old"]["per_attribute"][0]
    assert age["attribute"] == "Age" and age["deviation"] == pytest.approx(0.222, abs=6e-3)


def test_advise_provider_and_middleware_agree(tmp_path, cfg_file):
    summ, joints = tmp_path / "s.json", tmp_path / "mj.json"
    main(["summarize", "--data", DATA, "--label", "Health", "--out", str(summ),
          "--configs", cfg_file, "--masked-joints-out", str(joints)])
    provider = _advise(tmp_path, cfg_file, "--measure", "g3")
    mw = tmp_path / "mw.json"
    assert main(["advise", "--masked-joints", str(joints), "--summaries", str(summ),
                 "--configs", cfg_file, "--measure", "g3", "--out", str(mw)]) == 0
    assert provider.read_bytes() == mw.read_bytes()


def test_advise_usage_errors(cfg_file):
    with pytest.raises(SystemExit) as exc:
        main(["advise", "--data", DATA, "--label", "Health", "--configs", cfg_file,
              "--measure", "entropy"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["advise", "--configs", cfg_file])
    assert exc.value.code == 2


def test_advise_infeasible_summaries(tmp_path, cfg_file, capsys):
    summ, joints = tmp_path / "s.json", tmp_path / "mj.json"
    main(["summarize", "--data", DATA, "--label", "Health", "--out", str(summ),
          "--configs", cfg_file, "--masked-joints-out", str(joints)])
    doc = json.loads(summ.read_text())
    doc["marginals"]["Age"]["10"] += 1
    doc["marginals"]["Age"]["80"] -= 1
    summ.write_text(json.dumps(doc))
    code = main(["advise", "--masked-joints", str(joints), "--summaries", str(summ),
                 "--configs", cfg_file])
    assert code == 1
    err = capsys.readouterr().err
    assert "'Age'" in err and "masked value 'Old'" in err


def test_mask_first_row(tmp_path):
    cfg = MaskingConfiguration("m2", (
        ("Age", MaskingFunction.generalize_ranges([(10, 45, "Young"), (45, None, "Old")])),
        ("Weight", MaskingFunction.bucketize(5)),
        ("Zip", MaskingFunction.identity()),
    ))
    cfg_path = tmp_path / "m2.json"
    cfg_path.write_text(dump_configurations([cfg]))
    out = tmp_path / "masked.csv"
    assert main(["mask", "--data", EXCERPT, "--label", "Health", "--configs", str(cfg_path),
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "Age,Weight,Zip,Health"
    assert lines[1] == "Young,\"[30,35)\",21162,G"


def test_mask_identity_roundtrip(tmp_path, cfg_file):
    out = tmp_path / "m.csv"
    assert main(["mask", "--data", DATA, "--label", "Health", "--configs", cfg_file,
                 "--config-id", "cfg-identity", "--out", str(out)]) == 0
    with open(DATA) as fh:
        original = fh.read().splitlines()
    assert sorted(out.read_text().splitlines()[1:]) == sorted(original[1:])


def test_mask_validates_before_writing(tmp_path):
    cfg = MaskingConfiguration("partial", (("Age", MaskingFunction.identity()),))
    cfg_path = tmp_path / "p.json"
    cfg_path.write_text(dump_configurations([cfg]))
    out = tmp_path / "never.csv"
    assert main(["mask", "--data", DATA, "--label", "Health", "--configs", str(cfg_path),
                 "--out", str(out)]) == 1
    assert not out.exists()


def test_gen_configs_deterministic(tmp_path):
    paths = [tmp_path / f"g{i}.json" for i in range(2)]
    for p in paths:
        assert main(["gen-configs", "--data", DATA, "--label", "Health", "--k", "50",
                     "--seed", "7", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert len(json.loads(paths[0].read_text())) == 50


def test_gen_synth_and_evaluate(tmp_path, capsys):
    data, cfgs, out = tmp_path / "syn.csv", tmp_path / "c.json", tmp_path / "ev"
    assert main(["gen-synth", "--rows", "2000", "--attrs", "4", "--seed", "3",
                 "--out", str(data), "--time-advise", "3"]) == 0
    printed = capsys.readouterr().out
    for phase in ("masking", "reconstruction", "utility", "total", "selected:"):
        assert phase in printed
    main(["gen-configs", "--data", str(data), "--label", "label", "--k", "5", "--seed", "1",
          "--out", str(cfgs)])
    assert main(["evaluate", "--data", str(data), "--label", "label", "--configs", str(cfgs),
                 "--methods", "ipf-with-1d", "sampling", "--out", str(out), "--csv"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary) == {"ipf-with-1d", "sampling"}
    assert {"median_tvd", "p25", "p75"} <= set(summary["sampling"])
    assert (out / "records.csv").exists() and (out / "manifest.json").exists()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "maskadvisor.cli", "advise", "--configs", "x",
                           "--measure", "nope"], capture_output=True, text=True)
    assert proc.returncode == 2
