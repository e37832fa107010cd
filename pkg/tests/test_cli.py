import json

import pytest

from ramsey_forge.cli import main
from ramsey_forge.embedder import EmbedParams, embed_subdivision
from ramsey_forge.auxgraph import min_degree_core
from ramsey_forge.synthetic import blowup, random_regular
from ramsey_forge.task import SubdivisionTask


def read(p):
    return json.loads(p.read_text())


@pytest.fixture(scope="module")
def fixture_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    host, col, A = blowup(random_regular(1000, 4))
    task = SubdivisionTask.single_edge(12)
    _, core = min_degree_core(A.graph, 3)
    emb, _, fail = embed_subdivision(A.graph, sorted(A.graph.non_isolated()), core, A, task, EmbedParams())
    assert fail is None
    (d / "host.json").write_text(json.dumps(host.to_json()))
    (d / "col.json").write_text(json.dumps({"coloring": list(col)}))
    (d / "emb.json").write_text(json.dumps({"embedding": emb.to_json()}))
    return d, emb


class TestGenerate:
    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["generate", "--seed", "7", "--out", str(a)]) == 0
        assert main(["generate", "--seed", "7", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_preset_prints(self, capsys):
        assert main(["preset"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert "values" in json.dumps(out)


class TestUsage:
    def test_odd_sigma(self, tmp_path):
        assert main(["endtoend", "--sigma", "7", "--out", str(tmp_path / "r.json")]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["verify", "--host", str(tmp_path / "nope.json"), "--coloring", "x", "--embedding", "y"]) == 2

    def test_paper_scale_rejected(self):
        assert main(["preset", "--scale", "1", "--mode", "induced"]) == 2


class TestVerify:
    def test_valid(self, fixture_files, tmp_path):
        d, _ = fixture_files
        out = tmp_path / "v.json"
        rc = main(["verify", "--host", str(d / "host.json"), "--coloring", str(d / "col.json"),
                   "--embedding", str(d / "emb.json"), "--out", str(out)])
        assert rc == 0 and read(out)["ok"]

    def test_lift_then_verify_mapping(self, fixture_files, tmp_path):
        d, _ = fixture_files
        lifted = tmp_path / "lift.json"
        args = ["--host", str(d / "host.json"), "--coloring", str(d / "col.json")]
        assert main(["lift", *args, "--embedding", str(d / "emb.json"), "--out", str(lifted)]) == 0
        assert main(["verify", *args, "--embedding", str(lifted), "--out", str(tmp_path / "v.json")]) == 0

    def test_tampered(self, fixture_files, tmp_path):
        d, emb = fixture_files
        lifted = tmp_path / "lift.json"
        args = ["--host", str(d / "host.json"), "--coloring", str(d / "col.json")]
        main(["lift", *args, "--embedding", str(d / "emb.json"), "--out", str(lifted)])
        data = read(lifted)
        data["mapping"]["2"] = data["mapping"]["0"]
        lifted.write_text(json.dumps(data))
        out = tmp_path / "v.json"
        assert main(["verify", *args, "--embedding", str(lifted), "--out", str(out)]) == 1
        assert not read(out)["ok"]


class TestPipeline:
    def test_chain(self, tmp_path):
        H, host, col = tmp_path / "h.json", tmp_path / "host.json", tmp_path / "col.json"
        common = ["--s", "8", "--seed", "3"]
        assert main(["generate", *common, "--out", str(H)]) == 0
        assert main(["substitute", *common, "--hypergraph", str(H), "--gadget-order", "8", "--out", str(host)]) == 0
        assert main(["color", *common, "--host", str(host), "--out", str(col)]) == 0
        ex = tmp_path / "ex.json"
        assert main(["extract", *common, "--host", str(host), "--coloring", str(col), "--out", str(ex)]) == 0
        assert "aux" in read(ex)
        rc = main(["embed", *common, "--host", str(host), "--coloring", str(col), "--out", str(tmp_path / "e.json")])
        assert rc in (0, 1)

    def test_endtoend_constant_colouring_file(self, tmp_path):
        H = tmp_path / "h.json"
        main(["generate", "--s", "8", "--out", str(H)])
        m = len(read(H)["hypergraph"]["edges"])
        cf = tmp_path / "constant.json"
        cf.write_text(json.dumps({"coloring": [0] * (28 * m)}))
        out = tmp_path / "r.json"
        rc = main(["endtoend", "--s", "8", "--gadget-order", "8", "--coloring", str(cf), "--out", str(out)])
        assert rc == 0
        rep = read(out)
        assert rep["trials"][0]["gadget_ok"] == m
        assert rep["summary"]["unsound"] == 0
        assert (tmp_path / "r.csv").read_text().startswith("trial,status")

    def test_bad_colouring_file_length(self, tmp_path):
        cf = tmp_path / "short.json"
        cf.write_text(json.dumps({"coloring": [0, 0]}))
        assert main(["endtoend", "--s", "8", "--gadget-order", "8", "--coloring", str(cf)]) == 2
