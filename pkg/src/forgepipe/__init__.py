"""Face-forgery detection pipeline components.

Modules: dataio (artifact formats), geometry (boxes and similarity
transforms), tracking (detection association and alignment), synth
(synthetic scenes and embeddings), sampling (clip extraction), augment
(video augmentation), losses (contrastive objectives), head (classifier
training), evalmetrics (video-level metrics), enrichment (audio pairing),
config, and cli.
"""

__version__ = "0.1.0"

from .errors import ForgepipeError

__all__ = ["ForgepipeError", "__version__"]
