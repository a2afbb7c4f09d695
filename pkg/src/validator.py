"""Validation and sanity checks for network generation and significance tests."""

from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple


class ValidationLevel(Enum):
    """Validation severity levels."""
    SAFE = "safe"
    WARNING = "warning"
    DANGER = "danger"
    CRITICAL = "critical"


class ValidationResult:
    """Result of a validation check."""

    def __init__(self, level: ValidationLevel, message: str, can_proceed: bool = True):
        self.level = level
        self.message = message
        self.can_proceed = can_proceed

    def __str__(self):
        return f"[{self.level.value.upper()}] {self.message}"


MODELS = ("BA", "EH", "ER", "QS", "RH", "RT", "SF", "SW-NW", "SW-WS")

# Models whose native construction is directed; the rest are built undirected
# and oriented at random when a directed instance is requested.
DIRECTED_NATIVE = ("QS", "SW-NW", "SW-WS")


class GeneratorValidator:
    """Validator for synthetic network generation."""

    # Average-degree ranges for directed instances; undirected ranges are doubled.
    DIRECTED_DEGREE_RANGES: Dict[str, Tuple[float, float]] = {
        "SW-NW": (2.5, 5.0),
        "SW-WS": (2.5, 5.0),
        "RH": (2.0, 4.0),
        "RT": (1.5, 3.0),
        "BA": (3.0, 6.0),
        "EH": (3.0, 6.0),
        "ER": (3.0, 6.0),
        "QS": (3.0, 6.0),
        "SF": (3.0, 6.0),
    }

    # Ring-lattice neighbours on each side for the small-world models
    SW_NEIGHBORS = 2

    MIN_SIZE = {"RH": 6, "RT": 3, "BA": 3, "EH": 3, "ER": 2, "QS": 3, "SF": 2}

    # Realized average degree may deviate this much from the target
    DEGREE_TOLERANCE = 0.10

    def degree_range(self, model: str, directed: bool) -> Tuple[float, float]:
        low, high = self.DIRECTED_DEGREE_RANGES[model]
        if directed:
            return (low, high)
        return (2 * low, 2 * high)

    def minimum_size(self, model: str, neighbors: Optional[int] = None) -> int:
        if model.startswith("SW"):
            k = neighbors if neighbors is not None else self.SW_NEIGHBORS
            return 2 * k + 1
        return self.MIN_SIZE[model]

    def validate_model(self, model: str) -> ValidationResult:
        if model not in MODELS:
            return ValidationResult(
                ValidationLevel.CRITICAL,
                f"Unknown model {model!r}; expected one of {', '.join(MODELS)}",
                can_proceed=False,
            )
        return ValidationResult(ValidationLevel.SAFE, f"Model {model} is known")

    def validate_average_degree(self, model: str, directed: bool, k_avg: float) -> ValidationResult:
        """
        Check the target average degree against the model's range.

        Out-of-range values are allowed (explicit overrides) but flagged.
        """
        if k_avg <= 0:
            return ValidationResult(
                ValidationLevel.CRITICAL,
                f"Average degree must be positive, got {k_avg}",
                can_proceed=False,
            )
        low, high = self.degree_range(model, directed)
        if low <= k_avg <= high:
            return ValidationResult(
                ValidationLevel.SAFE,
                f"Average degree {k_avg:.3f} is within [{low}, {high}] for {model}",
            )
        return ValidationResult(
            ValidationLevel.WARNING,
            f"Average degree {k_avg:.3f} is outside [{low}, {high}] for {model} (override)",
        )

    def validate_size(self, model: str, n: int, neighbors: Optional[int] = None) -> ValidationResult:
        minimum = self.minimum_size(model, neighbors)
        if n < minimum:
            return ValidationResult(
                ValidationLevel.CRITICAL,
                f"{model} needs at least {minimum} nodes, got {n}",
                can_proceed=False,
            )
        return ValidationResult(ValidationLevel.SAFE, f"Size n={n} is valid for {model}")

    def validate_capacity(self, n: int, edges: int, directed: bool) -> ValidationResult:
        capacity = n * (n - 1) if directed else n * (n - 1) // 2
        if edges > capacity:
            return ValidationResult(
                ValidationLevel.CRITICAL,
                f"{edges} edges exceed simple-graph capacity {capacity} for n={n}",
                can_proceed=False,
            )
        if edges > 0.5 * capacity:
            return ValidationResult(
                ValidationLevel.WARNING,
                f"{edges} edges fill more than half of the capacity {capacity}",
            )
        return ValidationResult(ValidationLevel.SAFE, f"{edges} edges fit in capacity {capacity}")

    def validate_realized_degree(self, target: float, realized: float) -> ValidationResult:
        if target <= 0:
            return ValidationResult(ValidationLevel.SAFE, "No degree target")
        deviation = abs(realized - target) / target
        if deviation <= self.DEGREE_TOLERANCE:
            return ValidationResult(
                ValidationLevel.SAFE,
                f"Realized average degree {realized:.3f} within {deviation * 100:.1f}% of {target:.3f}",
            )
        return ValidationResult(
            ValidationLevel.DANGER,
            f"Realized average degree {realized:.3f} deviates {deviation * 100:.1f}% from {target:.3f}",
        )

    def validate_all(
        self,
        model: str,
        directed: bool,
        n: int,
        k_avg: float,
        edges: int,
        neighbors: Optional[int] = None,
    ) -> Tuple[bool, List[ValidationResult]]:
        """
        Run all generator validations.

        Returns:
            Tuple of (can_proceed, list of ValidationResults)
        """
        model_result = self.validate_model(model)
        if not model_result.can_proceed:
            return False, [model_result]

        results = [
            model_result,
            self.validate_average_degree(model, directed, k_avg),
            self.validate_size(model, n, neighbors),
            self.validate_capacity(n, edges, directed and model in DIRECTED_NATIVE),
        ]

        can_proceed = all(r.can_proceed for r in results)

        return can_proceed, results


class SignificanceValidator:
    """Validator for the inputs of a rank-based significance test."""

    # Groups smaller than this make the chi-square approximation unreliable
    MIN_GROUP_SIZE = 5

    def validate_group_sizes(self, sizes: Sequence[int]) -> ValidationResult:
        small = [s for s in sizes if s < self.MIN_GROUP_SIZE]
        if small:
            return ValidationResult(
                ValidationLevel.WARNING,
                f"Groups of size {small} are below {self.MIN_GROUP_SIZE}; chi-square p-value is approximate",
            )
        return ValidationResult(ValidationLevel.SAFE, "All groups are large enough for the chi-square approximation")
