import logging

import numpy as np

from count_copula.particle_filters.base_particle_filter import APF, BaseParticleFilter, resample_indices

logger = logging.getLogger(__name__)


class APFFilter(BaseParticleFilter):
    """Auxiliary particle filter.

    Ancestors are drawn in proportion to the current weight times the
    probability each particle gives the next observation, so every
    propagated particle carries equal weight afterwards.
    """

    name = APF

    def select_ancestors(self, log_weights, log_inc, uniforms) -> np.ndarray:
        return resample_indices(log_weights + log_inc, uniforms)
