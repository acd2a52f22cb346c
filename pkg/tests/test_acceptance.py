"""Acceptance gate: one test per release criterion, each printing a
PASS/FAIL line (run with -s to watch them live).

The heavy end-to-end chain (synthetic benchmark -> train -> LOSO eval)
runs once inside its criterion and its artifacts are reused by the
stream-equivalence, latency, and quantization criteria.
"""

import json
import time

import numpy as np
import pytest

from eegdecode import dsp
from eegdecode.boost import AdaBoostStumps
from eegdecode.cae import (encode, forward, grad, init_params, loss,
                           normalize_windows)
from eegdecode.cli import cli
from eegdecode.ica import fit_unmixing
from eegdecode.pipeline import ModelBundle
from eegdecode.realtime import StreamingDecoder, measure, offline_decisions

from helpers import amari_index
from reference_boost import brute_force_adaboost, brute_force_predict
from test_cae import _routing_stable


def report(name, ok, detail=""):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}"
          + (f" - {detail}" if detail else ""))
    return ok


_artifacts = {}


@pytest.fixture(scope="module")
def bench(tmp_path_factory):
    """synth (5 subjects x 15 trials, defaults, seed 7) -> train -> eval
    --loso, all through the CLI; timed for the runtime budget."""
    if "dir" not in _artifacts:
        root = tmp_path_factory.mktemp("bench")
        data = root / "data"
        model = root / "model.scbm"
        loso = root / "loso.json"
        t0 = time.perf_counter()
        assert cli(["synth", "--subjects", "5", "--trials", "15", "--seed", "7",
                    "--out", str(data)]) == 0
        assert cli(["train", "--data", str(data), "--out", str(model),
                    "--seed", "7"]) == 0
        assert cli(["eval", "--data", str(data), "--loso", "--seed", "7",
                    "--out", str(loso)]) == 0
        _artifacts.update(dir=root, data=data, model=model, loso=loso,
                          elapsed=time.perf_counter() - t0)
    return _artifacts


class TestFilterContract:
    def test_filter_contract(self):
        t0 = time.perf_counter()
        coeffs = dsp.design_bandpass(8, 40, 4, 250)
        h20, h4, hdc, hny = np.abs(dsp.frequency_response(
            coeffs, [20.0, 4.0, 0.0, 125.0]))
        db = lambda v: 20 * np.log10(max(v, 1e-300))
        ok = (abs(db(h20)) < 0.5 and db(h4) <= -24 and db(hdc) <= -60
              and db(hny) <= -60
              and np.abs(coeffs.poles()).max() < 1.0)
        elapsed = time.perf_counter() - t0
        assert report("filter-contract", ok and elapsed < 1.0,
                      f"|H(20)|={db(h20):+.3f} dB, |H(4)|={db(h4):.1f} dB, "
                      f"DC={db(hdc):.0f} dB, Nyq={db(hny):.0f} dB, {elapsed:.2f}s")


class TestGradientGate:
    def test_gradient_gate(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(7)
        params = init_params(seed=7, dtype=np.float64)
        X = rng.standard_normal((4, 12, 250))
        y = np.array([0, 1, 1, 0])
        xn = normalize_windows(X)
        grads, _, _ = grad(params, xn, y, lam=1.0, weight_decay=0.0)

        def total(p):
            f = forward(p, xn, mode="train")
            return loss(f.recon, xn, f.logits, y, 1.0)[0]

        eps = 1e-4
        names = sorted(grads)
        checked, tried, worst = 0, 0, 0.0
        while checked < 25 and tried < 150:
            tried += 1
            name = names[int(rng.integers(0, len(names)))]
            t = params.tensors[name]
            idx = tuple(int(rng.integers(0, s)) for s in t.shape)
            ga = grads[name][idx]
            if abs(ga) < 1e-7:
                continue
            if not _routing_stable(params, name, idx, eps, xn, y):
                continue  # FD undefined across a pool/ReLU kink
            orig = t[idx]
            t[idx] = orig + eps
            lp = total(params)
            t[idx] = orig - eps
            lm = total(params)
            t[idx] = orig
            fd = (lp - lm) / (2 * eps)
            worst = max(worst, abs(fd - ga) / max(abs(fd), abs(ga), 1e-8))
            checked += 1
        elapsed = time.perf_counter() - t0
        ok = checked >= 25 and worst < 1e-4 and elapsed < 60
        assert report("gradient-gate", ok,
                      f"{checked} coords, worst rel {worst:.2e}, {elapsed:.1f}s")


class TestIcaRecovery:
    def test_amari_across_seeds(self):
        from scipy import signal as scisig
        t0 = time.perf_counter()
        hits = 0
        worst = 0.0
        for seed in range(10):
            rng = np.random.default_rng(1000 + seed)
            n = 5000
            tt = np.arange(n)
            S = np.stack([
                scisig.sawtooth(2 * np.pi * tt / rng.uniform(40, 100)),
                scisig.square(2 * np.pi * tt / rng.uniform(40, 100)),
                np.sin(2 * np.pi * tt / rng.uniform(20, 60)),
                rng.laplace(size=n),
            ])
            S /= S.std(axis=1, keepdims=True)
            A = rng.standard_normal((12, 4))
            model = fit_unmixing(A @ S, k=4, seed=seed)
            idx = amari_index((model.unmix @ model.whitener) @ A)
            worst = max(worst, idx)
            hits += idx < 0.1
        elapsed = time.perf_counter() - t0
        ok = hits >= 9 and elapsed < 60
        assert report("ica-recovery", ok,
                      f"{hits}/10 seeds < 0.1 (worst {worst:.3f}), {elapsed:.1f}s")


class TestBoostOracle:
    def test_oracle_equivalence(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(12)
        shift = rng.standard_normal(64) * 0.6
        X = np.vstack([rng.standard_normal((100, 64)),
                       rng.standard_normal((100, 64)) + shift])
        y = np.array([0] * 100 + [1] * 100)
        perm = rng.permutation(200)
        X, y = X[perm], y[perm]

        model = AdaBoostStumps(n_rounds=50).fit(X, y)
        stumps_ref, alphas_ref = brute_force_adaboost(X, y, rounds=50)
        X_test = np.vstack([rng.standard_normal((50, 64)),
                            rng.standard_normal((50, 64)) + shift])
        same_structure = (
            len(model.stumps_) == len(stumps_ref)
            and all((s.feature, s.threshold, s.polarity) == ref
                    for s, ref in zip(model.stumps_, stumps_ref)))
        same_preds = np.array_equal(
            model.predict(X_test), brute_force_predict(X_test, stumps_ref, alphas_ref))
        elapsed = time.perf_counter() - t0
        ok = same_structure and same_preds and elapsed < 30
        assert report("adaboost-oracle", ok,
                      f"{len(model.stumps_)} rounds identical, {elapsed:.1f}s")


class TestEndToEndBenchmark:
    def test_loso_accuracy_and_silhouette(self, bench):
        doc = json.loads(bench["loso"].read_text())
        acc = doc["mean_window_accuracy"]
        sil = doc["mean_silhouette"]
        ok = (acc >= 0.85 and sil["latent"] > sil["raw"]
              and bench["elapsed"] < 15 * 60)
        assert report(
            "end-to-end-benchmark", ok,
            f"mean window acc {acc:.4f} (folds "
            f"{[round(f['window']['accuracy'], 3) for f in doc['folds']]}), "
            f"latent sil {sil['latent']:.3f} > raw {sil['raw']:.3f}, "
            f"{bench['elapsed']:.0f}s")


class TestStreamOfflineEquivalence:
    def test_replayed_decisions_match(self, bench):
        from eegdecode import dataio
        bundle = ModelBundle.load(bench["model"])
        rec = dataio.read_recording(sorted(bench["data"].glob("*.eeg"))[0])
        offline = offline_decisions(rec, bundle, stride=125, theta=0.6,
                                    amp_limit_uv=100.0)
        engine = StreamingDecoder(bundle, stride=125, theta=0.6, amp_limit_uv=100.0,
                                  capacity_s=rec.n_samples / 250.0 + 1)
        rng = np.random.default_rng(0)
        streamed, at = [], 0
        while at < rec.n_samples:
            k = int(rng.integers(1, 500))
            streamed.extend(engine.push_samples(rec.data[:, at:at + k]))
            at += k
        ok = len(streamed) == len(offline) and all(
            s.raw_label == o.raw_label and s.margin == o.margin and s.gate == o.gate
            for s, o in zip(streamed, offline))
        assert report("stream-offline-equivalence", ok,
                      f"{len(streamed)} decisions bit-identical")


class TestLatencyAndQuantization:
    def test_latency_and_int8_accuracy(self, bench):
        from eegdecode import dataio
        from eegdecode.cli import cli as run_cli
        from eegdecode.pipeline import PipelineConfig, build_windows

        bundle = ModelBundle.load(bench["model"])

        # encoder throughput: 1000 single-window encodes
        rng = np.random.default_rng(1)
        windows = normalize_windows(rng.standard_normal((1000, 12, 250))) \
            .astype(np.float32)
        t0 = time.perf_counter()
        for w in windows:
            encode(bundle.cae, w)
        per_encode_ms = (time.perf_counter() - t0) / 1000 * 1000

        # end-to-end decision latency over a replayed file
        rec = dataio.read_recording(sorted(bench["data"].glob("*.eeg"))[0])
        engine = StreamingDecoder(bundle)
        for at in range(0, rec.n_samples, 125):
            engine.push_samples(rec.data[:, at:at + 125])
        stats = measure(engine.latency_trace_ms, cpu_seconds=sum(engine.cpu_trace_s))

        # INT8 path accuracy on fresh held-out subjects
        q8_path = bench["dir"] / "model-int8.scbm"
        assert run_cli(["quantize", "--model", str(bench["model"]),
                        "--out", str(q8_path), "--mode", "int8",
                        "--data", str(bench["data"])]) == 0
        q8 = ModelBundle.load(q8_path)
        from eegdecode.synth import SynthConfig, generate_synthetic
        test_recs = generate_synthetic(SynthConfig(n_subjects=2, trials_per_subject=10,
                                                   seed=99))
        ws = build_windows(test_recs, PipelineConfig(use_ica=True, seed=99))
        acc_float = (bundle.predict_windows(ws.X)[0] == ws.y).mean()
        acc_int8 = (q8.predict_windows(ws.X)[0] == ws.y).mean()

        ok = (per_encode_ms < 10.0 and stats.mean_ms < 50.0
              and abs(acc_float - acc_int8) <= 0.02)
        assert report(
            "latency-and-int8", ok,
            f"encode {per_encode_ms:.2f} ms/win, decision mean {stats.mean_ms:.1f} ms "
            f"(p95 {stats.p95_ms:.1f} ms, energy {stats.energy_j_per_decision * 1000:.2f} mJ), "
            f"float acc {acc_float:.4f} vs int8 {acc_int8:.4f}")


class TestLiveTrialProtocol:
    def test_fifteen_trials_on_synthetic_live(self, bench):
        """Real-time protocol shape: trial accuracy in [0.60, 1.00] with
        true positives consistently above false positives."""
        from eegdecode.realtime import (DecodeSession, StreamingDecoder,
                                        SyntheticLiveSource, TrialSchedule,
                                        run_trial_protocol)
        bundle = ModelBundle.load(bench["model"])
        engine = StreamingDecoder(bundle, theta=0.6)
        session = DecodeSession(engine, k_debounce=3)
        source = SyntheticLiveSource(seed=23)
        ledger, trial_report, rates = run_trial_protocol(
            session, source, TrialSchedule(n_trials=15, cue_s=4.0, rest_s=3.0),
            rng=np.random.default_rng(23))
        ok = (len(ledger) == 15
              and 0.60 <= trial_report.accuracy <= 1.00
              and rates["tp_rate"] > rates["fp_rate"])
        assert report("live-trial-protocol", ok,
                      f"15 trials, acc {trial_report.accuracy:.3f}, "
                      f"TP {rates['tp_rate']:.2f} > FP {rates['fp_rate']:.2f}")


class TestSafetyProperties:
    def test_safety(self):
        import itertools
        from eegdecode.realtime.state import (ACCEPTED, ARTIFACT, GatedDecision,
                                              HAND_CLOSED, HAND_OPEN, LOW_CONFIDENCE,
                                              MODE_ACTIVE, SessionState,
                                              step_state_machine)

        def dec(label, gate=ACCEPTED):
            return GatedDecision(raw_label=label, margin=0.9, gate=gate)

        ok = True
        # 1. no command ever from a gated decision
        rng = np.random.default_rng(5)
        state = SessionState(mode=MODE_ACTIVE)
        for _ in range(500):
            label = int(rng.integers(0, 2))
            gate = (ACCEPTED, LOW_CONFIDENCE, ARTIFACT)[int(rng.integers(0, 3))]
            before = (state.move_streak, state.rest_streak, state.hand)
            _, cmd = step_state_machine(state, dec(label, gate), 3)
            if gate != ACCEPTED:
                ok &= cmd is None
                ok &= (state.move_streak, state.rest_streak, state.hand) == before

        # 2. no two consecutive identical commands over random inputs
        state = SessionState(mode=MODE_ACTIVE)
        last = None
        for _ in range(3000):
            label = int(rng.integers(0, 2))
            gate = (ACCEPTED, LOW_CONFIDENCE)[int(rng.integers(0, 2))]
            _, cmd = step_state_machine(state, dec(label, gate), 2)
            if cmd is not None:
                ok &= last is None or cmd.name != last
                last = cmd.name

        # 3. model check: every (hand, streaks, k <= 5) config reaches the
        # commanded state after k accepted same-class decisions
        checked = 0
        for k in range(1, 6):
            for hand, m0, r0, label in itertools.product(
                    (HAND_OPEN, HAND_CLOSED), range(k), range(k), (0, 1)):
                if m0 and r0:
                    continue
                state = SessionState(mode=MODE_ACTIVE, hand=hand,
                                     move_streak=m0, rest_streak=r0)
                cmds = []
                for _ in range(k):
                    _, cmd = step_state_machine(state, dec(label), k)
                    if cmd:
                        cmds.append(cmd.name)
                want = HAND_CLOSED if label else HAND_OPEN
                ok &= state.hand == want
                ok &= len(cmds) <= 1
                checked += 1
        assert report("safety-properties", ok, f"{checked} configurations model-checked")


class TestDeterminism:
    def test_byte_identical_artifacts(self, tmp_path):
        t0 = time.perf_counter()
        data = tmp_path / "d"
        assert cli(["synth", "--subjects", "2", "--trials", "5", "--seed", "3",
                    "--out", str(data)]) == 0
        blobs = {"model": [], "report": []}
        for tag in ("a", "b"):
            model = tmp_path / f"model-{tag}.scbm"
            rep = tmp_path / f"rep-{tag}.json"
            assert cli(["train", "--data", str(data), "--out", str(model),
                        "--seed", "3", "--epochs", "4", "--rounds", "20"]) == 0
            assert cli(["eval", "--data", str(data), "--loso", "--seed", "3",
                        "--epochs", "2", "--rounds", "10", "--out", str(rep)]) == 0
            blobs["model"].append(model.read_bytes())
            blobs["report"].append(rep.read_bytes())
        ok = (blobs["model"][0] == blobs["model"][1]
              and blobs["report"][0] == blobs["report"][1])
        assert report("determinism", ok,
                      f"model {len(blobs['model'][0])} B and report byte-identical, "
                      f"{time.perf_counter() - t0:.0f}s")
