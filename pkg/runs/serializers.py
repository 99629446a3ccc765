import math

from rest_framework import serializers

from damping.serializers import AssumptionReportSerializer, DampingSerializer
from euler_lifespan.errors import DomainError
from gas.thermo import GasLaw
from solver.fields import InitialData
from solver.grid import Grid1D
from solver.profiles import Profile, ProfileName
from .presets import DEFAULT_SCENARIO, PRESETS

PROFILE_CHOICES = [p.value for p in ProfileName]


class FloatListField(serializers.Field):
    """Comma-separated floats in text, a tuple once validated."""
    default_error_messages = {"invalid": "Expected comma-separated numbers."}

    def to_internal_value(self, data):
        items = data.split(",") if isinstance(data, str) else data
        try:
            return tuple(float(item) for item in items if str(item).strip())
        except (TypeError, ValueError):
            self.fail("invalid")

    def to_representation(self, value):
        return ",".join(repr(float(v)) for v in value)


class GasSerializer(serializers.Serializer):
    gamma = serializers.FloatField(default=2.0)

    def validate_gamma(self, value):
        if not value > 1:
            raise serializers.ValidationError("gamma must exceed 1")
        return value


class InitialSerializer(serializers.Serializer):
    phi = serializers.ChoiceField(choices=PROFILE_CHOICES, default=ProfileName.ZERO.value)
    psi = serializers.ChoiceField(choices=PROFILE_CHOICES, default=ProfileName.GAUSS_SLOPE.value)
    width = serializers.FloatField(default=1.0)
    epsilon = serializers.FloatField(default=0.1, min_value=0.0)
    x0 = serializers.FloatField(default=0.0)
    k_report = serializers.FloatField(default=1.0)
    delta0 = serializers.FloatField(default=0.1)
    simple_wave = serializers.BooleanField(default=False)

    def validate_width(self, value):
        if not value > 0:
            raise serializers.ValidationError("width must be positive")
        return value

    def validate_delta0(self, value):
        if not value > 0:
            raise serializers.ValidationError("delta0 must be positive")
        return value


class GridSerializer(serializers.Serializer):
    x_min = serializers.FloatField(required=False, allow_null=True, default=None)
    x_max = serializers.FloatField(required=False, allow_null=True, default=None)
    nx = serializers.IntegerField(required=False, allow_null=True, default=None, min_value=3)
    dx = serializers.FloatField(default=0.01)
    speed_bound = serializers.FloatField(default=4.0)

    def validate_dx(self, value):
        if not value > 0:
            raise serializers.ValidationError("dx must be positive")
        return value

    def validate_speed_bound(self, value):
        if not value > 0:
            raise serializers.ValidationError("speed_bound must be positive")
        return value


class SolverSerializer(serializers.Serializer):
    cfl = serializers.FloatField(default=0.9)
    g_stop = serializers.FloatField(default=1e4)
    resolution_fraction = serializers.FloatField(default=0.25, min_value=0.0)
    growth_stop = serializers.FloatField(default=12.0, min_value=0.0)
    u_floor = serializers.FloatField(default=1e-6, min_value=0.0)
    t_max = serializers.FloatField(default=50.0)
    max_steps = serializers.IntegerField(default=1_000_000, min_value=1)
    history_stride = serializers.IntegerField(default=1, min_value=1)
    richardson = serializers.BooleanField(default=True)

    def validate_cfl(self, value):
        if not 0 < value <= 1:
            raise serializers.ValidationError("cfl must lie in (0, 1]")
        return value

    def validate_g_stop(self, value):
        if not value > 0:
            raise serializers.ValidationError("g_stop must be positive")
        return value

    def validate_t_max(self, value):
        if not value > 0:
            raise serializers.ValidationError("t_max must be positive")
        return value


class SweepSerializer(serializers.Serializer):
    epsilons = FloatListField(default=(0.2, 0.1, 0.05, 0.025))

    def validate_epsilons(self, value):
        if any(not eps > 0 for eps in value):
            raise serializers.ValidationError("sweep epsilons must be positive")
        return value


class OutputSerializer(serializers.Serializer):
    dir = serializers.CharField(default="out")
    precision = serializers.IntegerField(default=12, min_value=1, max_value=17)


def _profiles(initial):
    common = {"center": initial["x0"], "width": initial["width"]}
    return Profile(initial["phi"], **common), Profile(initial["psi"], **common)


class RunConfigSerializer(serializers.Serializer):
    """
    A whole run configuration. Besides the per-section checks it sizes the
    grid, x_max >= x0 + speed_bound * t_max + support radius (mirrored for
    x_min), and rejects initial data with min u < delta0.
    """
    scenario = serializers.ChoiceField(choices=list(PRESETS), default=DEFAULT_SCENARIO)
    gas = GasSerializer()
    initial = InitialSerializer()
    damping = DampingSerializer()
    grid = GridSerializer()
    solver = SolverSerializer()
    sweep = SweepSerializer()
    output = OutputSerializer()

    def validate(self, attrs):
        initial, grid, solver = attrs["initial"], attrs["grid"], attrs["solver"]
        phi, psi = _profiles(initial)
        reach = grid["speed_bound"] * solver["t_max"] + max(phi.support_radius, psi.support_radius)
        x0 = initial["x0"]
        if grid["x_max"] is None:
            grid["x_max"] = x0 + reach
        elif grid["x_max"] < x0 + reach:
            raise serializers.ValidationError(
                {"grid.x_max": f"must be at least {x0 + reach:.6g} (x0 + speed_bound * t_max + support)"})
        if grid["x_min"] is None:
            grid["x_min"] = x0 - reach
        elif grid["x_min"] > x0 - reach:
            raise serializers.ValidationError(
                {"grid.x_min": f"must be at most {x0 - reach:.6g} (x0 - speed_bound * t_max - support)"})
        if grid["nx"] is None:
            cells = int(math.ceil((grid["x_max"] - grid["x_min"]) / grid["dx"] - 1e-9))
            # even cell count: the grid halves for the two-grid T* estimate
            grid["nx"] = cells + cells % 2 + 1

        try:
            law = GasLaw(attrs["gas"]["gamma"], solver["u_floor"])
            data = InitialData(phi=phi, psi=psi, epsilon=initial["epsilon"], x0=x0,
                               delta0=initial["delta0"], k_report=initial["k_report"],
                               simple_wave=initial["simple_wave"])
            data.check_positivity(law, Grid1D(grid["x_min"], grid["x_max"], grid["nx"]))
        except DomainError as exc:
            raise serializers.ValidationError({"initial.epsilon": exc.message})
        return attrs


class OracleCompareSerializer(serializers.Serializer):
    t_compare = serializers.FloatField()
    linf_u = serializers.ListField(child=serializers.FloatField())
    linf_v = serializers.ListField(child=serializers.FloatField())
    grids = serializers.ListField(child=serializers.IntegerField())


class CheckDampingSerializer(AssumptionReportSerializer):
    scenario = serializers.CharField()


class TraceSummarySerializer(serializers.Serializer):
    sign = serializers.CharField()
    x0 = serializers.FloatField()
    mode = serializers.CharField()
    form = serializers.CharField()
    samples = serializers.IntegerField()
    exited = serializers.BooleanField()
    blowup = serializers.BooleanField()
    blowup_time = serializers.FloatField(allow_null=True)
    max_A = serializers.FloatField()
    min_A = serializers.FloatField()
    crosscheck = serializers.FloatField()
    mode_gap = serializers.FloatField()


class SweepRowSerializer(serializers.Serializer):
    epsilon = serializers.FloatField()
    t_stop = serializers.FloatField()
    t_star = serializers.FloatField(allow_null=True)
    stopped_cause = serializers.CharField()
    phi_max = serializers.FloatField()
    phi_max_ratio = serializers.FloatField(allow_null=True)
