"""stackplay: object-concept learning through simulated stacking play.

Subpackages:
  simworld  analytic stacking environment and free-play data generation
  nnet      minimal numpy neural-network engine
  rl        stacking policy training and evaluation
  novelty   episode CNNs and embedding-based novel-class detection
"""

__version__ = "0.1.0"
