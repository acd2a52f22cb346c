"""Umbrella command line: synth / train / eval / quantize / stream.

Exit codes: 0 success, 1 usage error, 2 data or runtime error. All
randomness flows from --seed, so identical invocations produce
byte-identical artifacts.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import dataio
from .cae import TrainConfig
from .errors import EegDecodeError
from .pipeline import (ModelBundle, PipelineConfig, balance_windows, build_windows,
                       evaluate_holdout, evaluate_loso, quantize_bundle,
                       train_pipeline)
from .synth import SynthConfig, generate_synthetic

# CLI training default: 60 epochs keeps the full synthetic benchmark
# (train + 5 LOSO folds) inside its runtime budget; the library-level
# TrainConfig default stays at 200.
CLI_EPOCHS = 60


def _add_common_training(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=CLI_EPOCHS)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--lam", type=float, default=1.0, help="classification loss weight")
    p.add_argument("--rounds", type=int, default=200, help="boosting rounds")
    p.add_argument("--select-rounds", action="store_true",
                   help="pick rounds by CV grid on training data")
    p.add_argument("--stride", type=int, default=125)
    p.add_argument("--no-ica", action="store_true", help="skip ICA cleaning")


def _pipeline_config(args):
    train = TrainConfig(lam=args.lam, max_epochs=args.epochs,
                        patience=args.patience, seed=args.seed)
    return PipelineConfig(stride=args.stride, use_ica=not args.no_ica,
                          n_rounds=args.rounds, select_rounds=args.select_rounds,
                          train=train, seed=args.seed)


def _load_dataset(data_dir):
    data_dir = Path(data_dir)
    recs = []
    for path in sorted(data_dir.glob("*.eeg")):
        recs.append((path.stem, dataio.read_recording(path)))
    if not recs:
        raise EegDecodeError(f"no .eeg recordings under {data_dir}")
    return recs


def _windows_from_dir(data_dir, cfg):
    ws = build_windows(_load_dataset(data_dir), cfg)
    return balance_windows(ws, seed=cfg.seed) if cfg.balance else ws


def cmd_synth(args):
    cfg = SynthConfig(n_subjects=args.subjects, trials_per_subject=args.trials,
                      move_s=args.move_s, rest_s=args.rest_s,
                      mu_erd=args.erd, noise_rms=args.noise,
                      blink_rate=args.blink_rate, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for sid, rec in generate_synthetic(cfg):
        path = dataio.write_recording(out / f"{sid}.eeg", rec)
        print(f"wrote {path} ({rec.n_samples} samples, {len(rec.events)} events)")
    return 0


def cmd_train(args):
    cfg = _pipeline_config(args)
    ws = _windows_from_dir(args.data, cfg)
    print(f"training on {len(ws)} windows "
          f"({int((ws.y == 1).sum())} move / {int((ws.y == 0).sum())} rest)")
    bundle, history, info = train_pipeline(ws, cfg)
    bundle.save(args.out)
    last = history.rows[-1]
    print(f"best epoch {history.best_epoch}, val acc {last['val_acc']:.3f}, "
          f"rounds {len(bundle.classifier.stumps_)}")
    print(f"wrote {args.out}")
    return 0


def cmd_eval(args):
    cfg = _pipeline_config(args)
    ws = _windows_from_dir(args.data, cfg)
    if args.loso:
        # retrains per fold; a --model here is not reused (leakage), it
        # only pins the expectation that a trained bundle exists
        doc = evaluate_loso(ws, cfg)
    else:
        bundle = ModelBundle.load(args.model) if args.model else None
        doc = evaluate_holdout(ws, cfg, test_fraction=args.holdout, bundle=bundle)
    text = json.dumps(doc, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text)
    acc = doc["mean_window_accuracy"]
    print(f"mean window accuracy: {acc:.4f}")
    return 0


def cmd_quantize(args):
    cfg = _pipeline_config(args)
    bundle = ModelBundle.load(args.model)
    if bundle.quantized is not None:
        raise EegDecodeError("model is already quantized")
    ws = _windows_from_dir(args.data, cfg)
    qbundle = quantize_bundle(bundle, ws, mode=args.mode)
    qbundle.save(args.out)
    print(f"wrote {args.out} ({args.mode})")
    return 0


def cmd_stream(args):
    from .realtime import (DecodeSession, ReplaySource, SessionService,
                           StreamingDecoder, SyntheticLiveSource, TrialSchedule,
                           measure, run_trial_protocol)

    bundle = ModelBundle.load(args.model)
    if args.source.startswith("replay:"):
        rec = dataio.read_recording(args.source[len("replay:"):])
        source = ReplaySource(rec, chunk=args.stride, max_speed=args.max_speed)
    elif args.source == "synth-live":
        source = SyntheticLiveSource(seed=args.seed, max_speed=args.max_speed)
    else:
        raise EegDecodeError(f"unknown source {args.source!r} "
                             "(use replay:<file> or synth-live)")
    engine = StreamingDecoder(bundle, stride=args.stride, theta=args.theta,
                              amp_limit_uv=args.amp_limit)
    session = DecodeSession(engine, k_debounce=args.debounce)
    session.state.mode = args.mode

    if args.serve:
        host, _, port = args.serve.partition(":")
        service = SessionService(session, source, host=host or "127.0.0.1",
                                 port=int(port or 0), seed=args.seed)
        addr = service.start()
        print(f"session service on ws://{addr[0]}:{addr[1]}/ (ctrl-c to stop)")
        try:
            while True:
                import time as _time
                _time.sleep(0.5)
        except KeyboardInterrupt:
            pass
        finally:
            service.stop()
        return 0

    if args.protocol_trials:
        schedule = TrialSchedule(n_trials=args.protocol_trials,
                                 cue_s=args.cue_s, rest_s=args.rest_s)
        rng = np.random.default_rng(args.seed)
        ledger, report, rates = run_trial_protocol(
            session, source, schedule, rng=rng, chunk=args.stride)
        for rec_ in ledger:
            mark = "ok " if rec_.correct else "MISS"
            print(f"trial {rec_.trial:2d}: cued={rec_.cued} decoded={rec_.decoded} {mark}")
        print(f"trial accuracy {report.accuracy:.3f}, "
              f"TP {rates['tp_rate']:.3f} / FP {rates['fp_rate']:.3f}")
    else:
        n = 0
        limit = int(args.duration * source.fs) if args.duration else None
        while limit is None or n < limit:
            data = source.read(args.stride)
            if data is None:
                break
            session.process_chunk(data)
            n += data.shape[1]
    if engine.latency_trace_ms:
        stats = measure(engine.latency_trace_ms,
                        cpu_seconds=sum(engine.cpu_trace_s))
        print(json.dumps({"latency": stats.to_dict()}, sort_keys=True))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="eegdecode",
        description="EEG motor-intent decoding: synthetic data, training, "
                    "evaluation, quantization, and live streaming.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--subjects", type=int, default=5)
    p.add_argument("--trials", type=int, default=15)
    p.add_argument("--move-s", type=float, default=3.0)
    p.add_argument("--rest-s", type=float, default=4.0)
    p.add_argument("--erd", type=float, default=0.7, help="mu ERD depth")
    p.add_argument("--noise", type=float, default=2.5, help="pink noise uV RMS")
    p.add_argument("--blink-rate", type=float, default=4.0, help="blinks/min")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("train", help="offline pipeline: clean, ICA, CAE, boost")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _add_common_training(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="LOSO or holdout evaluation (writes JSON)")
    p.add_argument("--data", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--loso", action="store_true")
    p.add_argument("--holdout", type=float, default=0.25,
                   help="test fraction for the shuffled split")
    p.add_argument("--out", default=None)
    _add_common_training(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("quantize", help="export reduced-precision model")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("int8", "fp16"), default="int8")
    p.add_argument("--data", required=True, help="calibration recordings")
    _add_common_training(p)
    p.set_defaults(fn=cmd_quantize)

    p = sub.add_parser("stream", help="run the live decoding loop")
    p.add_argument("--model", required=True)
    p.add_argument("--source", required=True, help="replay:<file> | synth-live")
    p.add_argument("--serve", default=None, help="host:port for the session service")
    p.add_argument("--stride", type=int, default=125)
    p.add_argument("--theta", type=float, default=0.6)
    p.add_argument("--debounce", type=int, default=3)
    p.add_argument("--amp-limit", type=float, default=100.0)
    p.add_argument("--mode", choices=("active", "passive", "idle"), default="active")
    p.add_argument("--max-speed", action="store_true")
    p.add_argument("--duration", type=float, default=None, help="seconds to stream")
    p.add_argument("--protocol-trials", type=int, default=None,
                   help="run a cue protocol with this many trials")
    p.add_argument("--cue-s", type=float, default=4.0)
    p.add_argument("--rest-s", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_stream)
    return parser


def cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.fn(args)
    except EegDecodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
