"""Segment-boundary annotation for dialogue datasets.

Streams every dialogue through the fitted termination model exactly the
way the online driver does: stop probability after each line, a marker
whenever it crosses the threshold (the segment reseeds there), plus the
offline best segmentation for comparison. Output is JSON Lines, one meta
line then one record per dialogue, with the transcript rendered when acts
are available.
"""

import json

import numpy as np

from .subgoal.stream import TerminationStream


def render_act(act):
    if not act.slots:
        return "%s: %s" % (act.speaker, act.act)
    parts = ", ".join(
        "%s=%s" % (k, v if v else "?") for k, v in sorted(act.slots.items()))
    return "%s: %s(%s)" % (act.speaker, act.act, parts)


def annotate_dialogue(estimator, traj, threshold):
    """Stop-probability curve, threshold markers, and the offline cuts."""
    traj = np.asarray(traj, dtype=np.float64)
    if traj.ndim != 2 or traj.shape[1] != estimator.n_features_in_:
        raise ValueError(
            "trajectory width %s does not match the %d-wide features the "
            "model was fitted on" % (traj.shape[1:], estimator.n_features_in_))
    stream = TerminationStream(estimator.model_, threshold=threshold)
    stream.start(traj[0])
    probs, markers, labels = [], [], []
    for t in range(1, len(traj)):
        p = stream.push(traj[t])
        probs.append(round(float(p), 6))
        if p >= threshold:
            markers.append(t)
            labels.append(stream.latent_label())
            stream.reset_segment()
    bounds, _ = estimator.segment(traj)
    interior = [int(c) for c in bounds if 0 < c < len(traj) - 1]
    return {"p": probs, "markers": markers, "labels": labels,
            "cuts": interior}


def visualize_segments(estimator, dialogues, out_path, threshold=None,
                       config_hash=None):
    """Annotate each dialogue and write a JSON Lines file.

    `dialogues` holds either recorded episodes (whose states and acts are
    used) or bare state trajectories. An empty input writes just the meta
    line.
    """
    if threshold is None:
        threshold = 0.2
    meta = {"meta": {"threshold": threshold,
                     "dialogues": len(dialogues)}}
    if config_hash:
        meta["meta"]["config"] = config_hash
    with open(out_path, "w") as fh:
        fh.write(json.dumps(meta, sort_keys=True) + "\n")
        for i, item in enumerate(dialogues):
            acts = getattr(item, "acts", None)
            traj = item.states if hasattr(item, "states") else item
            record = {"dialogue": i, "turns": len(traj) - 1}
            record.update(annotate_dialogue(estimator, traj, threshold))
            if acts:
                record["transcript"] = [render_act(a) for a in acts]
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    return out_path
