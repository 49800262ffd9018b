import json
import socket
import subprocess
import sys
import time
from pathlib import Path

import httpx
import pytest

from gesturepipe import cli
from gesturepipe.config import AppConfig

FIXTURES = Path(__file__).parent / "fixtures"
SESSION = FIXTURES / "session_mixed.ndjson"


class TestExtract:
    def test_fixture_matches_golden(self, tmp_path):
        out = tmp_path / "keyframes.ndjson"
        code = cli.main(["extract", str(SESSION), str(out)])
        assert code == 0
        assert out.read_bytes() == (FIXTURES / "golden_keyframes.ndjson").read_bytes()

    def test_two_runs_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.ndjson", tmp_path / "b.ndjson"
        assert cli.main(["extract", str(SESSION), str(a)]) == 0
        assert cli.main(["extract", str(SESSION), str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_empty_input_empty_log(self, tmp_path):
        src = tmp_path / "empty.ndjson"
        src.write_text("", encoding="utf-8")
        out = tmp_path / "out.ndjson"
        assert cli.main(["extract", str(src), str(out)]) == 0
        assert out.read_text(encoding="utf-8") == ""

    def test_malformed_line_reports_line_number(self, tmp_path, capsys):
        src = tmp_path / "bad.ndjson"
        good = SESSION.read_text(encoding="utf-8").splitlines()[0]
        src.write_text(good + "\n{oops\n", encoding="utf-8")
        code = cli.main(["extract", str(src), str(tmp_path / "out.ndjson")])
        assert code == 2
        assert "line 2" in capsys.readouterr().err

    def test_missing_input(self, tmp_path):
        assert cli.main(["extract", str(tmp_path / "nope"), str(tmp_path / "o")]) == 2


class TestGenCorpus:
    def test_seeded_runs_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for dest in (a, b):
            code = cli.main(["gen-corpus", str(dest), "--per-class", "3",
                             "--noise-sigma", "0.01", "--seed", "11"])
            assert code == 0
        for path_a in sorted(a.rglob("*.ndjson")):
            path_b = b / path_a.relative_to(a)
            assert path_a.read_bytes() == path_b.read_bytes()

    def test_sigma_zero_emits_templates_verbatim(self, tmp_path):
        from gesturepipe.corpus import GESTURE_LABELS, template_frame
        from gesturepipe.landmarks import serialize_frame

        dest = tmp_path / "c"
        assert cli.main(["gen-corpus", str(dest), "--per-class", "2",
                         "--noise-sigma", "0", "--seed", "3"]) == 0
        for label in GESTURE_LABELS:
            for sample in sorted((dest / label).glob("*.ndjson")):
                lines = sample.read_text(encoding="utf-8").splitlines()
                for i, line in enumerate(lines):
                    expected = serialize_frame(
                        template_frame(label, t_us=i * 33_334))
                    assert line == expected

    def test_bad_per_class(self, tmp_path):
        assert cli.main(["gen-corpus", str(tmp_path / "x"),
                         "--per-class", "0"]) == 1


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    dest = tmp_path_factory.mktemp("corpus")
    assert cli.main(["gen-corpus", str(dest), "--per-class", "12",
                     "--noise-sigma", "0.01", "--seed", "5"]) == 0
    return dest


class TestBench:
    def test_report_shape_and_rerun_identical(self, small_corpus, tmp_path):
        r1, r2 = tmp_path / "r1.json", tmp_path / "r2.json"
        assert cli.main(["bench", str(small_corpus), "--report", str(r1)]) == 0
        assert cli.main(["bench", str(small_corpus), "--report", str(r2)]) == 0
        assert r1.read_bytes() == r2.read_bytes()
        report = json.loads(r1.read_text(encoding="utf-8"))
        assert report["backend"] == "Rules"
        assert set(report["per_gesture"]) == {
            "fist", "open_palm", "vulcan_salute", "shaka_sign",
            "finger_gun", "sign_of_the_horns"}
        for stats in report["per_gesture"].values():
            assert stats["samples"] == 12
            assert stats["accuracy_pct"] == round(
                100.0 * stats["correct"] / stats["samples"], 2)

    def test_sigma_zero_is_perfect(self, tmp_path):
        dest = tmp_path / "clean"
        assert cli.main(["gen-corpus", str(dest), "--per-class", "2",
                         "--noise-sigma", "0", "--seed", "1"]) == 0
        report_path = tmp_path / "report.json"
        assert cli.main(["bench", str(dest), "--report", str(report_path)]) == 0
        report = json.loads(report_path.read_text(encoding="utf-8"))
        assert report["overall"]["accuracy_pct"] == 100.0

    def test_empty_class_dir_is_error(self, tmp_path, capsys):
        dest = tmp_path / "broken"
        (dest / "fist").mkdir(parents=True)
        assert cli.main(["bench", str(dest)]) == 2
        assert "no samples" in capsys.readouterr().err

    def test_missing_corpus_dir(self, tmp_path):
        assert cli.main(["bench", str(tmp_path / "nope")]) == 2


class TestReplay:
    def test_fixture_matches_golden(self, tmp_path):
        out = tmp_path / "commands.ndjson"
        assert cli.main(["replay", str(SESSION), "--out", str(out)]) == 0
        assert out.read_bytes() == (FIXTURES / "golden_commands.ndjson").read_bytes()

    def test_rejected_entries_for_unknown_gestures(self, tmp_path):
        out = tmp_path / "commands.ndjson"
        assert cli.main(["replay", str(SESSION), "--out", str(out)]) == 0
        rejected = [json.loads(l) for l in out.read_text().splitlines()
                    if json.loads(l)["type"] == "CommandRejected"]
        assert rejected, "fixture contains unroutable gestures"

    def test_cache_warm_run_skips_interpretation(self, tmp_path):
        # mixed fixture: every interpretation is served from the cache on the
        # warm run; the explainer still runs for the unroutable tasks
        cache = tmp_path / "cache.ndjson"
        cold, gw_cold = cli.run_replay(SESSION, AppConfig(), cache_path=cache)
        assert gw_cold.interpretations > 0
        warm, gw_warm = cli.run_replay(SESSION, AppConfig(), cache_path=cache)
        assert gw_warm.interpretations == 0
        summary = warm[-1]
        assert summary["type"] == "summary"
        assert summary["backend_interpretations"] == 0
        assert summary["cache_hits"] > 0

    def test_cache_warm_run_zero_backend_calls_routable_session(self, tmp_path):
        # a session of routable gestures only: the warm run must not touch
        # the backend at all (no interpretation, no explainer)
        from gesturepipe.corpus import FRAME_STEP_US, template_frame
        from gesturepipe.landmarks import serialize_frame

        session = tmp_path / "routable.ndjson"
        lines = []
        t = 0
        for label, count in (("open_palm", 5), ("vulcan_salute", 5), ("shaka_sign", 5)):
            for _ in range(count):
                lines.append(serialize_frame(template_frame(label, t_us=t)))
                t += FRAME_STEP_US
        session.write_text("".join(l + "\n" for l in lines), encoding="utf-8")

        cache = tmp_path / "cache.ndjson"
        _, gw_cold = cli.run_replay(session, AppConfig(), cache_path=cache)
        assert gw_cold.interpretations > 0
        warm, gw_warm = cli.run_replay(session, AppConfig(), cache_path=cache)
        assert gw_warm.interpretations == 0
        assert gw_warm.backend.calls == 0
        assert warm[-1]["completion_calls"] == 0

    def test_missing_session(self, tmp_path):
        assert cli.main(["replay", str(tmp_path / "nope.ndjson")]) == 2


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class TestServe:
    def test_bad_config_exits_1(self, tmp_path, capsys):
        bad = tmp_path / "cfg.json"
        bad.write_text('{"backend": "quantum"}', encoding="utf-8")
        assert cli.main(["--config", str(bad), "serve"]) == 1
        assert "backend" in capsys.readouterr().err

    def test_health_endpoint_over_real_server(self, tmp_path):
        port = free_port()
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"serve": {"port": port}}), encoding="utf-8")
        proc = subprocess.Popen(
            [sys.executable, "-m", "gesturepipe.cli", "--config", str(cfg), "serve"],
            stdout=subprocess.PIPE, stderr=subprocess.PIPE)
        try:
            deadline = time.monotonic() + 15
            body = None
            while time.monotonic() < deadline:
                try:
                    body = httpx.get(f"http://127.0.0.1:{port}/v1/health",
                                     timeout=1.0).json()
                    break
                except httpx.HTTPError:
                    time.sleep(0.1)
            assert body == {"status": "ok"}
        finally:
            proc.terminate()
            proc.wait(timeout=10)

    def test_port_in_use_exits_3(self, tmp_path):
        with socket.socket() as sock:
            sock.bind(("127.0.0.1", 0))
            sock.listen(1)
            port = sock.getsockname()[1]
            cfg = tmp_path / "cfg.json"
            cfg.write_text(json.dumps({"serve": {"port": port}}), encoding="utf-8")
            proc = subprocess.run(
                [sys.executable, "-m", "gesturepipe.cli", "--config", str(cfg), "serve"],
                capture_output=True, timeout=30)
        assert proc.returncode == 3


class TestCacheCommand:
    def test_stats_and_clear(self, tmp_path, capsys):
        cache = tmp_path / "cache.ndjson"
        cli.run_replay(SESSION, AppConfig(), cache_path=cache)
        assert cli.main(["cache", "stats", "--cache", str(cache)]) == 0
        stats = json.loads(capsys.readouterr().out)
        assert stats["entries"] > 0
        assert cli.main(["cache", "clear", "--cache", str(cache)]) == 0
        assert not cache.exists()


class TestUsage:
    def test_no_command_is_usage_error(self):
        assert cli.main([]) == 1

    def test_unknown_command(self):
        assert cli.main(["frobnicate"]) == 1
