"""End-to-end: coupled training, evaluation, and the metrics files.

Trains the full two-time-scale system on a small scenario for a few hundred
episodes, evaluates the learned policy against the greedy baseline and the
exact oracle, and peeks at the emitted CSV files. Takes a couple of minutes.
"""

import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from ranslice import LoopConfig, RunConfig, ScenarioConfig, evaluate, parse_metrics, train

out = Path("runs/demo_end_to_end")
cfg = RunConfig(
    scenario=ScenarioConfig(num_embb=2, num_urllc=2, num_rbs=4, k_max=3),
    loop=LoopConfig(
        episodes=400,
        steps_per_episode=50,
        checkpoint_every=200,
        eval_trials=20,
        eval_steps=10,
    ),
    seed=101,
    out=str(out),
)

print(f"training {cfg.loop.episodes} episodes x {cfg.loop.steps_per_episode} steps ...")
t0 = time.perf_counter()
summary = train(cfg)
print(f"done in {time.perf_counter() - t0:.0f} s")

rewards = np.array(summary["episode_rewards"])
losses = np.array(summary["episode_losses"])
tenth = len(rewards) // 10
print(f"episode reward: first tenth {rewards[:tenth].mean():.3f} "
      f"-> last tenth {rewards[-tenth:].mean():.3f}")
print(f"episode loss:   first tenth {losses[:tenth].mean():.3f} "
      f"-> last tenth {losses[-tenth:].mean():.3f}")

print("\nevaluation (greedy policies, fresh positions and fading per trial):")
for policy in ("sama-rl", "1sra", "oracle"):
    res = evaluate(replace(cfg, policy=policy))
    print(
        f"  {policy:>8}: objective {res['objective_mbps']:6.3f} Mbps, "
        f"eMBB satisfied {res['embb_satisfied']:.2f}/2, "
        f"URLLC satisfied {res['urllc_satisfied']:.2f}/2"
    )

records = parse_metrics(summary["metrics"])
print(f"\nmetrics.csv: {len(records)} step rows; first row: {records[0]}")
print(f"episodes.csv and controller.csv sit next to it under {out}/")
print(f"checkpoints: {sorted(p.name for p in (out / 'agents').glob('*.bin'))}")
