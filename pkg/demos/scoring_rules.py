"""Expected proper scoring rules on posteriors.

Cross-entropy and Brier score reward the honest posterior; the Bayes EC
only sees the decisions the posteriors imply.
"""

import numpy as np

from costeval import Priors, bayes_ec_epsr, brier, cross_entropy, zero_one_cost

rng = np.random.default_rng(0)
true_post = rng.dirichlet(np.ones(3), 5000)
# labels drawn from the posteriors, so true_post is calibrated by construction
labels = (rng.uniform(size=(5000, 1)) > np.cumsum(true_post, axis=1)).sum(axis=1)

# same argmax, overconfident
sharp = true_post ** 4
sharp /= sharp.sum(axis=1, keepdims=True)

for name, s in (("honest", true_post), ("overconfident", sharp)):
    xe = cross_entropy(s, labels)
    br = brier(s, labels)
    ec = bayes_ec_epsr(s, labels, zero_one_cost(3))
    print(f"{name:14s} XE {xe.raw:.4f} (norm {xe.normalized:.3f})  "
          f"Brier {br.raw:.4f}  BayesEC {ec.raw:.4f}")

# evaluation priors may differ from the empirical ones
pr = Priors([0.6, 0.3, 0.1])
print("XE under priors 0.6/0.3/0.1:", round(cross_entropy(true_post, labels, pr).raw, 4))
