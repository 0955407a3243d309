"""
When order matters
==================

Each window holds two short events. Event A moves both channels together,
event B moves them apart, and the label says which came first. Every time step
looks the same in both classes, so only a model that reads the sequence in
order can tell them apart.
"""
from failbench.metrics import macro_f1
from failbench.models import ModelSpec, fit, predict
from failbench.synth import PrecursorConfig, SynthConfig, order_sensitive_task

task = order_sensitive_task(SynthConfig(seed=0, precursor=PrecursorConfig(order_sensitive=True)))
X, y = task.features, task.labels
cut = int(0.7 * len(y))
print("windows:", X.shape, "positive share:", y.mean())

for spec in (ModelSpec("logreg", {"C": 1.0}),
             ModelSpec("lstm", {"hidden_size": 16, "epochs": 40, "learning_rate": 0.01})):
    model = fit(spec, X[:cut], y[:cut])
    print(f"{spec.algorithm:>7}: test macro F1 {macro_f1(y[cut:], predict(model, X[cut:])[1]):.3f}")
