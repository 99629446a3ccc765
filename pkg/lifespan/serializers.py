from rest_framework import serializers

from solver.fields import GradientRule, StopCause

STOP_CAUSE_HELP = (
    "gradient: a gradient monitor fired (see gradient_rule); vacuum: u reached the floor; "
    "horizon: t_max reached; instability: non-finite field; "
    "budget: solver.max_steps exhausted before t_max (exit 0, no T*)"
)
GRADIENT_RULE_HELP = (
    "threshold: g >= g_stop; growth: g/osc >= growth_stop * its initial value; "
    "resolution: g >= resolution_fraction * osc / dx"
)


class BlowupReportSerializer(serializers.Serializer):
    stopped_cause = serializers.ChoiceField(choices=[c.value for c in StopCause], help_text=STOP_CAUSE_HELP)
    gradient_rule = serializers.ChoiceField(choices=[r.value for r in GradientRule], allow_null=True,
                                            help_text=GRADIENT_RULE_HELP)
    t_stop = serializers.FloatField()
    t_star_estimate = serializers.FloatField(allow_null=True)
    t_star_fine = serializers.FloatField(allow_null=True)
    t_star_coarse = serializers.FloatField(allow_null=True)
    blowup_node_x = serializers.FloatField(allow_null=True)
    peak_quantity = serializers.CharField(allow_null=True)
    inside_region = serializers.BooleanField(allow_null=True)
    region = serializers.CharField()
    phi_max = serializers.FloatField()
    phi_max_ratio = serializers.FloatField(allow_null=True)
    epsilon = serializers.FloatField()
    k_measured = serializers.FloatField()
    kk_satisfied = serializers.BooleanField()
    regime_exits = serializers.IntegerField()
    steps = serializers.IntegerField()
    stop_message = serializers.CharField(allow_blank=True)
    fit_error = serializers.CharField(allow_null=True)


class ScalingFitSerializer(serializers.Serializer):
    model = serializers.CharField()
    exponent_or_rate = serializers.FloatField()
    r_squared = serializers.FloatField()
    rows_used = serializers.IntegerField()
