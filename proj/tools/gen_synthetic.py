#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The cotr Authors
"""Generate the bundled 50-sample synthetic fixture.

Writes dataset.jsonl, predictions.jsonl and expected.json. Expected scores
are computed here with exact rational arithmetic from the anchors the
generator itself places, without parsing the rendered text, so they act as
an independent oracle for the C++ pipeline.
"""

import argparse
import json
import random
from fractions import Fraction
from pathlib import Path

SPORTS = ["american_football", "ice_hockey", "soccer", "basketball", "volleyball"]
TASKS = ["perception", "temporal", "tactical", "causal", "counterfactual"]
PHRASES = [
    "the home side wins the ball in midfield",
    "a long pass switches play to the left wing",
    "the goalkeeper comes off the line",
    "the defender steps up and the offside trap springs",
    "a timeout is called by the visiting coach",
    "the striker cuts inside onto the stronger foot",
    "the referee signals a foul near the box",
    "players regroup after the restart",
    "the setter fakes and feeds the middle blocker",
    "the forward screens the goalie on the power play",
]
ANSWERS = ["left wing", "the goalkeeper", "a penalty", "home team", "timeout", "offside",
           "the striker", "counter attack", "zone defence", "blocked shot"]
TOL = Fraction(10)
MODES = ["perfect", "jitter", "half_anchored", "no_anchor", "wrong_answer",
         "widened", "unclosed_answer", "distractors", "all_zero", "random"]


def ts(sec):
    return f"{sec // 60:02d}:{sec % 60:02d}"


def render_anchor(a):
    s, e = a
    return ts(s) if s == e else f"[{ts(s)}-{ts(e)}]"


def iou(a, b):
    inter = max(0, min(a[1], b[1]) - max(a[0], b[0]))
    union = (a[1] - a[0]) + (b[1] - b[0]) - inter
    if union == 0:
        return Fraction(1) if a == b else Fraction(0)
    return Fraction(inter, union)


def ramp(d):
    return max(Fraction(0), 1 - Fraction(d) / TOL)


def similarity(gt, pred):
    gp, pp = gt[0] == gt[1], pred[0] == pred[1]
    if not gp and not pp:
        return iou(gt, pred)
    if gp and pp:
        return ramp(abs(gt[0] - pred[0]))
    point, span = (gt, pred) if gp else (pred, gt)
    t = point[0]
    if span[0] <= t <= span[1]:
        return Fraction(1)
    return ramp(span[0] - t if t < span[0] else t - span[1])


def best_match(gts, preds, sim):
    total = Fraction(0)
    for g in gts:
        total += max([sim(g, p) for p in preds], default=Fraction(0))
    return total / len(gts)


def make_sample(rng, i):
    duration = rng.choice([45, 150, 420, 900, 2400, 4000])
    n_steps = rng.randint(1, 5)
    steps = []
    for _ in range(n_steps):
        if rng.random() < 0.5 or duration < 30:
            t = rng.randint(0, duration)
            a = (t, t)
        else:
            s = rng.randint(0, duration - 20)
            a = (s, s + rng.randint(4, 20))
        steps.append({"text": rng.choice(PHRASES), "anchor": a})
    return {
        "sample_id": f"syn-{i:03d}",
        "video_id": f"video-{i % 17:02d}",
        "duration_s": duration,
        "sport": SPORTS[i % len(SPORTS)],
        "task_type": TASKS[(i // 2) % len(TASKS)],
        "question": f"What happens around the decisive moment in clip {i}?",
        "answer": rng.choice(ANSWERS),
        "steps": steps,
    }


def clamp(x, d):
    return min(max(x, 0), d)


def make_prediction(rng, s, mode):
    d = s["duration_s"]
    answer = s["answer"]
    pred_steps = []  # (text, [anchors])
    for k, st in enumerate(s["steps"]):
        a = st["anchor"]
        if mode == "perfect" or mode == "wrong_answer" or mode == "unclosed_answer":
            anchors = [a]
        elif mode == "jitter":
            off = rng.randint(-15, 15)
            anchors = [(clamp(a[0] + off, d), clamp(a[1] + off, d))]
        elif mode == "half_anchored":
            anchors = [a] if k % 2 == 0 else []
        elif mode == "no_anchor":
            anchors = []
        elif mode == "widened":
            w = rng.randint(1, 8)
            anchors = [(clamp(a[0] - w, d), clamp(a[1] + w, d))]
        elif mode == "distractors":
            far = rng.randint(0, d)
            anchors = [(far, far), (clamp(a[0] + 3, d), clamp(a[1] + 3, d))]
        elif mode == "all_zero":
            anchors = [(0, 0)]
        else:  # random
            t = rng.randint(0, d)
            anchors = [(t, t)] if rng.random() < 0.5 else [(clamp(t - 5, d), clamp(t + 5, d))]
        # A span collapsed by clamping is a point.
        anchors = [(x, y) if x != y else (x, x) for (x, y) in anchors]
        pred_steps.append((st["text"], anchors))
    if mode == "wrong_answer":
        answer = next(x for x in ANSWERS if x != s["answer"])

    lines = []
    for k, (text, anchors) in enumerate(pred_steps):
        lead = " ".join(render_anchor(a) for a in anchors)
        lines.append(f"Step {k + 1}: " + (lead + " " if lead else "") + text)
    thinking = "\n".join(lines)
    if mode == "unclosed_answer":
        raw = f"<thinking>{thinking}</thinking><answer>{answer}"
    else:
        raw = f"<thinking>{thinking}</thinking><answer>{answer}</answer>"
    return raw, pred_steps, answer, mode != "unclosed_answer"


def normalize(text):
    out = []
    for ch in text:
        if ch.isspace():
            out.append(" ")
        elif ord(ch) < 128 and not ch.isalnum():
            continue
        else:
            out.append(ch.lower() if ord(ch) < 128 else ch)
    return " ".join("".join(out).split())


def generate(seed, n):
    rng = random.Random(seed)
    samples, preds, records = [], [], []
    i = 0
    while len(samples) < n:
        s = make_sample(rng, len(samples))
        mode = MODES[len(samples) % len(MODES)]
        raw, pred_steps, answer, fmt = make_prediction(rng, s, mode)
        gts = [st["anchor"] for st in s["steps"]]
        all_pred = [a for _, anchors in pred_steps for a in anchors]
        score = best_match(gts, all_pred, similarity)
        strict = best_match(gts, all_pred, iou)
        i += 1
        # Keep hit@0.5 insensitive to floating-point summation order.
        if abs(score - Fraction(1, 2)) < Fraction(1, 10**6):
            continue
        samples.append(s)
        preds.append({"sample_id": s["sample_id"], "raw_text": raw})
        coverage = Fraction(sum(1 for _, a in pred_steps if a), len(pred_steps))
        records.append({
            "sample_id": s["sample_id"],
            "mode": mode,
            "task_type": s["task_type"],
            "format_ok": fmt,
            "correct": normalize(answer) == normalize(s["answer"]),
            "coverage": coverage,
            "grounding_score": score,
            "grounding_score_strict": strict,
        })
    return samples, preds, records


def sample_json(s):
    return {
        "sample_id": s["sample_id"],
        "video_id": s["video_id"],
        "duration_s": s["duration_s"],
        "sport": s["sport"],
        "task_type": s["task_type"],
        "question": s["question"],
        "reference_answer": s["answer"],
        "reference_chain": {
            "steps": [{"text": st["text"],
                       "anchors": [{"start_s": st["anchor"][0], "end_s": st["anchor"][1]}]}
                      for st in s["steps"]],
            "answer": s["answer"],
        },
    }


def tally_stats(samples):
    buckets = [(0, "<1min"), (1, "1-5min"), (5, "5-10min"), (10, "10-30min"), (30, "30-60min"), (60, ">=60min")]
    hist = {label: 0 for _, label in buckets}
    chain, answer_len, points, spans = {}, {}, 0, 0
    for s in samples:
        minutes = Fraction(s["duration_s"], 60)
        label = [lab for lo, lab in buckets if minutes >= lo][-1]
        hist[label] += 1
        n = len(s["steps"])
        chain[str(n)] = chain.get(str(n), 0) + 1
        w = len(s["answer"].split())
        answer_len[str(w)] = answer_len.get(str(w), 0) + 1
        for st in s["steps"]:
            if st["anchor"][0] == st["anchor"][1]:
                points += 1
            else:
                spans += 1
    return {"video_length_histogram": [{"bucket": lab, "count": hist[lab]} for _, lab in buckets],
            "chain_length": chain, "answer_word_length": answer_len,
            "anchor_kinds": {"point": points, "span": spans}}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "synthetic"))
    ap.add_argument("--seed", type=int, default=20260419)
    ap.add_argument("-n", type=int, default=50)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    samples, preds, records = generate(args.seed, args.n)
    with open(out / "dataset.jsonl", "w") as f:
        for s in samples:
            f.write(json.dumps(sample_json(s)) + "\n")
    with open(out / "predictions.jsonl", "w") as f:
        for p in preds:
            f.write(json.dumps(p) + "\n")

    n = len(records)
    scores = [r["grounding_score"] for r in records]
    per_task = {}
    for r in records:
        per_task.setdefault(r["task_type"], []).append(r["correct"])
    task_acc = {t: Fraction(sum(v), len(v)) for t, v in per_task.items()}
    expected = {
        "n_samples": n,
        "accuracy": float(Fraction(sum(r["correct"] for r in records), n)),
        "anchor_rate": float(sum(r["coverage"] for r in records) / n),
        "anchor_presence_rate": float(Fraction(sum(r["coverage"] > 0 for r in records), n)),
        "miou": float(sum(scores) / n),
        "miou_strict_iou": float(sum(r["grounding_score_strict"] for r in records) / n),
        "hit_at_0_5": float(Fraction(sum(x > Fraction(1, 2) for x in scores), n)),
        "task_accuracy": {t: float(v) for t, v in sorted(task_acc.items())},
        "task_average": float(sum(task_acc.values()) / len(task_acc)),
        "stats_first10": tally_stats(samples[:10]),
        "records": [{**r,
                     "coverage": float(r["coverage"]),
                     "grounding_score": float(r["grounding_score"]),
                     "grounding_score_strict": float(r["grounding_score_strict"])} for r in records],
    }
    with open(out / "expected.json", "w") as f:
        json.dump(expected, f, indent=2)
        f.write("\n")
    print(f"wrote {n} samples to {out}")


if __name__ == "__main__":
    main()
