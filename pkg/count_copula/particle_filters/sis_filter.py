import logging

from count_copula.particle_filters.base_particle_filter import SIS, BaseParticleFilter

logger = logging.getLogger(__name__)


class SISFilter(BaseParticleFilter):
    """Sequential importance sampling: weights accumulate, never resampled."""

    name = SIS
