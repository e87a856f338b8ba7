"""Multi-source 2D sound localization with adversarial domain adaptation.

Subpackages:
  grad     -- static-graph reverse-mode autodiff, losses, Adam, checkpoints
  room     -- shoebox image-source acoustic simulator and signal generators
  spectra  -- STFT front-end turning multichannel clips into feature tensors
  heatmap  -- target rendering, keypoint extraction, matching and metrics
  data     -- binary dataset files, record generation, label sealing
  adapt    -- localizer/discriminator models, training methods, experiments
  cli      -- gen / train / eval / report command line entry points
"""

__version__ = "0.1.0"
