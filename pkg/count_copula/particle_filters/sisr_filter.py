import logging

from count_copula.particle_filters.base_particle_filter import SISR, BaseParticleFilter

logger = logging.getLogger(__name__)


class SISRFilter(BaseParticleFilter):
    """SIS with multinomial resampling whenever ESS drops below ``ess_threshold * N``."""

    name = SISR

    def should_resample(self, ess) -> bool:
        return ess < self.ess_threshold * self.particles
