import json

import jsonschema
import pytest

from ddtloc.cli import main
from ddtloc.formats import load_manifest
from ddtloc.synth import generate, random_spec

import schemas


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Synth set plus a results file, shared by the command tests."""
    root = tmp_path_factory.mktemp("cliwork")
    spec = random_spec(seed=17, n_images=10, h=10, w=10, d=32, n_noisy=2,
                       two_layer=True)
    generate(spec, root / "data")
    manifest = str(root / "data" / "manifest.json")
    results = str(root / "results.json")
    assert main(["localize", "--manifest", manifest, "--out", results]) == 0
    return root, manifest, results


def test_localize_results_schema(workdir):
    _, _, results = workdir
    doc = json.loads(open(results).read())
    jsonschema.validate(doc, schemas.RESULTS)
    assert doc["method"] == "ddt"


def test_localize_all_methods(workdir, tmp_path):
    _, manifest, _ = workdir
    for method in ("ddt", "ddt-plus", "scda"):
        out = tmp_path / f"{method}.json"
        assert main(["localize", "--manifest", manifest, "--method", method,
                     "--out", str(out)]) == 0
        jsonschema.validate(json.loads(out.read_text()), schemas.RESULTS)


def test_eval_prints_corloc(workdir, tmp_path, capsys):
    _, manifest, results = workdir
    report = tmp_path / "report.json"
    assert main(["eval", "--manifest", manifest, "--results", results,
                 "--out", str(report)]) == 0
    line = capsys.readouterr().out.strip().splitlines()[-1]
    assert line.startswith("CorLoc: ")
    float(line.split(": ")[1])  # NN.N
    jsonschema.validate(json.loads(report.read_text()), schemas.REPORT)


def test_noise_roc_csv(workdir, tmp_path):
    _, manifest, results = workdir
    out = tmp_path / "roc.csv"
    assert main(["noise-roc", "--manifest", manifest, "--results", results,
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "threshold,fpr,tpr"
    assert lines[-1].startswith("# auc = ")


def test_filter_writes_loadable_manifest(workdir, tmp_path):
    _, manifest, results = workdir
    out = tmp_path / "clean.json"
    assert main(["filter", "--manifest", manifest, "--results", results,
                 "--threshold", "0.1", "--out", str(out)]) == 0
    jsonschema.validate(json.loads(out.read_text()), schemas.MANIFEST)
    cleaned = load_manifest(out)
    original = load_manifest(manifest)
    assert 0 < len(cleaned) < len(original)
    noisy_ids = {rec.id for rec in original.images if rec.noisy}
    assert noisy_ids.isdisjoint({rec.id for rec in cleaned.images})


def test_export_voc_files(workdir, tmp_path):
    # the documented chain: filter first, then export the cleaned manifest
    # against the original results
    _, manifest, results = workdir
    cleaned = tmp_path / "clean.json"
    assert main(["filter", "--manifest", manifest, "--results", results,
                 "--threshold", "0.1", "--out", str(cleaned)]) == 0
    out_dir = tmp_path / "ann"
    assert main(["export-voc", "--manifest", str(cleaned), "--results", results,
                 "--category", "widget", "--out-dir", str(out_dir)]) == 0
    files = sorted(out_dir.glob("*.xml"))
    assert len(files) == len(load_manifest(cleaned))
    assert all(f.read_text().startswith("<annotation>") for f in files)


def test_heatmap_command(workdir, tmp_path):
    _, manifest, _ = workdir
    out = tmp_path / "img.pgm"
    assert main(["heatmap", "--manifest", manifest, "--image-id", "img_000",
                 "--component", "1", "--out", str(out)]) == 0
    assert out.read_bytes().startswith(b"P5\n")


def test_synth_command(tmp_path):
    out_dir = tmp_path / "gen"
    assert main(["synth", "--seed", "3", "--images", "4", "--cells-h", "6",
                 "--cells-w", "6", "--channels", "8", "--noisy", "1",
                 "--out-dir", str(out_dir)]) == 0
    manifest = load_manifest(out_dir / "manifest.json")
    assert len(manifest) == 4


def test_synth_from_spec_file(tmp_path):
    from ddtloc.synth import save_spec

    spec = random_spec(seed=21, n_images=3, h=5, w=5, d=6, n_noisy=0)
    spec_path = tmp_path / "spec.json"
    save_spec(spec, spec_path)
    out_dir = tmp_path / "gen"
    assert main(["synth", "--spec", str(spec_path), "--out-dir", str(out_dir)]) == 0
    assert len(load_manifest(out_dir / "manifest.json")) == 3


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["localize", "--manifest", "m.json", "--out", "r.json", "--frobnicate"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err.lower()


def test_pipeline_error_names_stage(tmp_path, capsys):
    code = main(["localize", "--manifest", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "r.json")])
    assert code == 1
    err = capsys.readouterr().err
    assert "loading manifest" in err


def test_ddt_plus_without_prev_layer_fails_upfront(tmp_path, capsys):
    spec = random_spec(seed=4, n_images=3, h=5, w=5, d=6, n_noisy=0)
    generate(spec, tmp_path / "one_layer")
    code = main(["localize", "--manifest", str(tmp_path / "one_layer" / "manifest.json"),
                 "--method", "ddt-plus", "--out", str(tmp_path / "r.json")])
    assert code == 1
    assert "prev" in capsys.readouterr().err


def test_idempotent_outputs(workdir, tmp_path):
    _, manifest, _ = workdir
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out, threads in ((a, "1"), (b, "8")):
        assert main(["localize", "--manifest", manifest, "--out", str(out),
                     "--threads", threads]) == 0
    assert a.read_bytes() == b.read_bytes()
