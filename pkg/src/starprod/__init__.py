__version__ = "0.1.0"

from .errors import (
	StarprodError,
	TruncationError,
	DomainError,
	DimensionMismatch,
	ResourceError,
	StabilityError,
	DegenerateError,
	DegenerateFrame,
	BranchError,
	ConfigError,
	NumericalCheckFailed,
)
from .catalog import (
	CATALOG_ENV_VAR,
	catalog_path,
	load_defaults,
)
from .settings import Settings, get_settings, thread_count
from .fock import (
	FockSpace,
	Operator,
	StateSpec,
	build_ladder,
	commutator,
	displacement,
	make_state,
	number_operator,
	number_power,
	parity,
	trace_product,
)
from .framework import (
	LabelGrid,
	SymbolField,
	QuantizerPair,
	symbol_field,
	reconstruct,
	pairing_kernel,
	star_via_operators,
	star_kernel,
	star_via_kernel,
	trace_power,
	fidelity,
	poisson_bracket,
	commutator_field,
	intertwine,
)
from .maps import (
	pair_from_name,
	weyl_pair,
	sordered_pair,
	tomo_pair,
	matrix_mechanics_pair,
	ehrenfest_star,
	SOrder,
)
from .dynamics import heisenberg_evolve
from .deformed import DeformationContext, k_product, k_commutator, k_star, k_poisson
from .structures import (
	StructureTensor,
	assoc_check,
	lie_jacobi_check,
	kernel_assoc_check,
	builtin_tensor,
)

__all__ = [
	"__version__",
	"StarprodError",
	"TruncationError",
	"DomainError",
	"DimensionMismatch",
	"ResourceError",
	"StabilityError",
	"DegenerateError",
	"DegenerateFrame",
	"BranchError",
	"ConfigError",
	"NumericalCheckFailed",
	"CATALOG_ENV_VAR",
	"catalog_path",
	"load_defaults",
	"Settings",
	"get_settings",
	"thread_count",
	"FockSpace",
	"Operator",
	"StateSpec",
	"build_ladder",
	"commutator",
	"displacement",
	"make_state",
	"number_operator",
	"number_power",
	"parity",
	"trace_product",
	"LabelGrid",
	"SymbolField",
	"QuantizerPair",
	"symbol_field",
	"reconstruct",
	"pairing_kernel",
	"star_via_operators",
	"star_kernel",
	"star_via_kernel",
	"trace_power",
	"fidelity",
	"poisson_bracket",
	"commutator_field",
	"intertwine",
	"pair_from_name",
	"weyl_pair",
	"sordered_pair",
	"tomo_pair",
	"matrix_mechanics_pair",
	"ehrenfest_star",
	"SOrder",
	"heisenberg_evolve",
	"DeformationContext",
	"k_product",
	"k_commutator",
	"k_star",
	"k_poisson",
	"StructureTensor",
	"assoc_check",
	"lie_jacobi_check",
	"kernel_assoc_check",
	"builtin_tensor",
]
