"""Self-supervised representation learning toolkit for tissue-tile pipelines.

Subpackages:
    ingest   -- slide manifests, tissue masking, tiling, artifact filtering
    augment  -- seeded image transforms and two-branch augmentation policies
    core     -- redundancy-reduction objective, encoders, LARS, pretraining
    probe    -- frozen-encoder linear evaluation and metrics
    mil      -- attention-based multiple-instance slide classification
    harness  -- synthetic data, experiment sweeps, run registry, CLI
"""

__version__ = "0.1.0"
