"""
The four classifiers
====================

Logistic regression, random forest, RBF SVM and LSTM share one train/predict
contract. ``fit`` standardizes the inputs with training statistics; flat models
see the window flattened row by row, the LSTM sees it as a sequence.
"""
import numpy as np

from failbench.metrics import macro_f1
from failbench.models import ModelSpec, bce_loss, fit, predict, sigmoid_f1_loss

rng = np.random.default_rng(0)
y = np.arange(300) % 2
X = rng.normal(size=(300, 6, 2))  # 300 windows, 6 time steps, 2 variables
X[y == 1, 3:, 0] += 1.5           # failures drift upward late in the window

cut = 200
specs = [
    ModelSpec("logreg", {"C": 1.0}),
    ModelSpec("random_forest", {"n_estimators": 50, "max_features_fraction": 0.33}),
    ModelSpec("svm_rbf", {"C": 1.0}),
    ModelSpec("lstm", {"hidden_size": 8, "epochs": 30, "learning_rate": 0.01}),
]
for spec in specs:
    model = fit(spec, X[:cut], y[:cut])
    proba, label = predict(model, X[cut:])
    print(f"{spec.algorithm:>14}: test macro F1 {macro_f1(y[cut:], label):.3f}")

# the two LSTM losses on a tiny batch
logits, labels = np.array([2.0, -1.0, 0.5]), np.array([1, 0, 0])
print("BCE:", round(bce_loss(logits, labels), 4), " sigmoid F1:", round(sigmoid_f1_loss(logits, labels), 4))
