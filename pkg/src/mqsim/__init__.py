"""Mixed quantum / Koopman-von Neumann state-vector simulator."""
from .state import GridAxis, FactorLayout, MqsState, make_state, axis_dft, inner
from .kvn import ClassicalHamiltonianSpec, EvolutionFactor, HamiltonianFactors, build_kvn_generator
from .models import ModelParams, table1_params, build_quantum_model, build_kvn_model
from .propagator import EvolveSettings, evolve, strang_step, dense_generator, expm_evolve

__version__ = "0.1.0"
