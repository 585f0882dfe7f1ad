"""freqaug: frequency-domain data augmentation for segmentation datasets.

Random channel-wise Butterworth high-pass filtering, homologous sample
blending under continuous/patch/grid masks, Gaussian structure-saliency
pretext targets, and the loss evaluators that tie them together. Exposed
as a library, a FastAPI service, and a thin CLI client.
"""

__version__ = "0.1.0"
