from rest_framework import serializers

from .coefficients import DampingFamily, DampingSpec


class DampingSerializer(serializers.Serializer):
    """The ``[damping]`` section of a run configuration."""
    family = serializers.ChoiceField(choices=[f.value for f in DampingFamily],
                                     default=DampingFamily.ZERO.value)
    mu = serializers.FloatField(default=1.0)
    lambda1 = serializers.FloatField(default=0.0)
    lambda2 = serializers.FloatField(default=0.0)

    def validate(self, attrs):
        if attrs["family"] == DampingFamily.SEPARATED_PRODUCT.value and min(attrs["lambda1"], attrs["lambda2"]) < 0:
            raise serializers.ValidationError({"lambda1": "separated_product exponents must be non-negative."})
        return attrs

    def to_spec(self, attrs=None) -> DampingSpec:
        """DampingSpec from ``attrs`` (already validated) or this serializer's validated data."""
        return DampingSpec(**(self.validated_data if attrs is None else attrs))


class ViolationSerializer(serializers.Serializer):
    kind = serializers.CharField()
    t = serializers.FloatField(allow_null=True)
    x = serializers.FloatField(allow_null=True)
    lhs = serializers.FloatField(allow_null=True)
    rhs = serializers.FloatField(allow_null=True)


class AssumptionReportSerializer(serializers.Serializer):
    family = serializers.CharField()
    c_a = serializers.FloatField(allow_null=True)
    violations = ViolationSerializer(many=True)
    notes = serializers.ListField(child=serializers.CharField())
