from rest_framework import serializers

from .exceptions import ConfigError, DomainError, EmptyTableError
from .profiles import Family, FamilySpec, ProfileModel, TrueProfile
from .simulator import BBO_REFERENCE_LENGTH_MM, Schedule, ShotsMode, SimConfig, bbo_profile

SEED_MAX = 2 ** 64 - 1


def _family_spec(family, degree):
    try:
        if str(family).lower() in (Family.POLYNOMIAL, 'poly') and degree is not None:
            return FamilySpec(Family.POLYNOMIAL, degree)
        spec = FamilySpec.parse(family)
        if degree is not None and degree != spec.degree:
            return FamilySpec(spec.family, degree)
        return spec
    except DomainError as exc:
        raise serializers.ValidationError({'family': str(exc)}) from exc


def family_representation(spec):
    return {'family': spec.family.value, 'degree': spec.degree}


class ProfileModelSerializer(serializers.Serializer):
    family = serializers.CharField()
    degree = serializers.IntegerField(required=False, min_value=0)
    phi_family = serializers.CharField(required=False)
    phi_degree = serializers.IntegerField(required=False, min_value=0)
    theta_params = serializers.ListField(child=serializers.FloatField(), allow_empty=False)
    phi_params = serializers.ListField(child=serializers.FloatField(), allow_empty=False)
    x_domain = serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2)

    def validate(self, attrs):
        theta_family = _family_spec(attrs['family'], attrs.get('degree'))
        phi_family = theta_family
        if 'phi_family' in attrs or 'phi_degree' in attrs:
            phi_family = _family_spec(attrs.get('phi_family', attrs['family']), attrs.get('phi_degree'))
        model_class = self.context.get('model_class', ProfileModel)
        try:
            attrs['model'] = model_class(
                tuple(attrs['theta_params']), tuple(attrs['phi_params']),
                tuple(attrs['x_domain']), theta_family, phi_family)
        except DomainError as exc:
            raise serializers.ValidationError(str(exc)) from exc
        return attrs

    def create(self, validated_data):
        return validated_data['model']

    def to_representation(self, model):
        data = family_representation(model.theta_family)
        if model.phi_family != model.theta_family:
            data['phi_family'] = model.phi_family.family.value
            data['phi_degree'] = model.phi_family.degree
        data['theta_params'] = list(model.theta_params)
        data['phi_params'] = list(model.phi_params)
        data['x_domain'] = list(model.x_domain)
        return data


class BBOProfileSerializer(serializers.Serializer):
    length_mm = serializers.FloatField()
    x_domain = serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2)
    phase_intercept = serializers.FloatField(required=False)
    phase_slope = serializers.FloatField(required=False, default=0.0)
    reference_length_mm = serializers.FloatField(required=False, default=BBO_REFERENCE_LENGTH_MM)

    def validate_length_mm(self, value):
        if value <= 0:
            raise serializers.ValidationError('must be positive')
        return value

    def create(self, validated_data):
        options = dict(validated_data)
        length = options.pop('length_mm')
        domain = options.pop('x_domain')
        return bbo_profile(length, domain, **options)


class XGridSerializer(serializers.Serializer):
    start = serializers.FloatField()
    stop = serializers.FloatField()
    num = serializers.IntegerField(min_value=1)

    def create(self, validated_data):
        start, stop, num = validated_data['start'], validated_data['stop'], validated_data['num']
        if num == 1:
            return (start,)
        step = (stop - start) / (num - 1)
        return tuple(start + step * index for index in range(num - 1)) + (stop,)


class SimConfigSerializer(serializers.Serializer):
    """Flat JSON run configuration for the simulator."""

    seed = serializers.IntegerField(
        min_value=0, max_value=SEED_MAX, error_messages={'required': 'seed required'})
    true_profile = serializers.DictField(required=False)
    bbo = serializers.DictField(required=False)
    xs = serializers.ListField(child=serializers.FloatField(), required=False, allow_empty=False)
    x_grid = serializers.DictField(required=False)
    shots_mode = serializers.ChoiceField(choices=ShotsMode.choices, default=ShotsMode.FIXED_PER_SETTING)
    shots = serializers.IntegerField(min_value=0, required=False, default=0)
    rate = serializers.FloatField(min_value=0.0, required=False, allow_null=True, default=None)
    schedule = serializers.ChoiceField(choices=Schedule.choices, default=Schedule.CYCLED)
    exact = serializers.BooleanField(required=False, default=False)

    def _nested(self, key, serializer_class, data, **context):
        serializer = serializer_class(data=data, context=context)
        if not serializer.is_valid():
            raise serializers.ValidationError({key: serializer.errors})
        return serializer.save()

    def validate(self, attrs):
        if ('true_profile' in attrs) == ('bbo' in attrs):
            raise serializers.ValidationError({'true_profile': 'give exactly one of true_profile or bbo'})
        if 'true_profile' in attrs:
            truth = self._nested('true_profile', ProfileModelSerializer, attrs['true_profile'],
                                 model_class=TrueProfile)
        else:
            truth = self._nested('bbo', BBOProfileSerializer, attrs['bbo'])

        if ('xs' in attrs) == ('x_grid' in attrs):
            raise serializers.ValidationError({'xs': 'give exactly one of xs or x_grid'})
        xs = attrs.get('xs') or self._nested('x_grid', XGridSerializer, attrs['x_grid'])

        if not attrs['exact'] and attrs['shots'] == 0:
            raise serializers.ValidationError({'shots': 'must be positive unless exact is true'})
        try:
            truth.rescale(xs)
            attrs['config'] = SimConfig(
                true_profile=truth, xs=tuple(xs), shots_mode=attrs['shots_mode'],
                shots=attrs['shots'], rate=attrs['rate'], schedule=attrs['schedule'],
                seed=attrs['seed'], exact=attrs['exact'])
        except (DomainError, EmptyTableError) as exc:
            raise serializers.ValidationError({'xs': str(exc)}) from exc
        return attrs

    def create(self, validated_data):
        return validated_data['config']

    def to_representation(self, config):
        return {
            'seed': config.seed,
            'true_profile': ProfileModelSerializer(config.true_profile).data,
            'xs': list(config.xs),
            'shots_mode': config.shots_mode.value,
            'shots': config.shots,
            'rate': config.rate,
            'schedule': config.schedule.value,
            'exact': config.exact,
        }


class PointEstimateSerializer(serializers.Serializer):
    x = serializers.FloatField()
    theta = serializers.FloatField()
    phi = serializers.FloatField()
    phi_unwrapped = serializers.FloatField()
    loss = serializers.FloatField()
    degenerate = serializers.BooleanField()
    near_pole = serializers.BooleanField()


class FitReportSerializer(serializers.Serializer):
    method = serializers.CharField()
    global_loss = serializers.FloatField()
    model = ProfileModelSerializer(allow_null=True)
    points = PointEstimateSerializer(many=True)
    per_x_losses = serializers.ListField(child=serializers.FloatField())
    restarts = serializers.IntegerField()
    iterations = serializers.IntegerField()
    converged = serializers.BooleanField()
    degenerate_xs = serializers.ListField(child=serializers.FloatField())
    near_pole_xs = serializers.ListField(child=serializers.FloatField())
    excluded_xs = serializers.ListField(child=serializers.FloatField())
    start_losses = serializers.ListField(child=serializers.FloatField())
    seed_loss = serializers.FloatField(allow_null=True)


class VerificationReportSerializer(serializers.Serializer):
    name = serializers.CharField()
    estimate = serializers.FloatField()
    standard_error = serializers.FloatField()
    target = serializers.FloatField()
    bound = serializers.FloatField()
    passed = serializers.BooleanField()
    replicates = serializers.IntegerField()
    seed = serializers.IntegerField()
    details = serializers.DictField()


class RunManifestSerializer(serializers.Serializer):
    command = serializers.CharField()
    config_path = serializers.CharField(allow_null=True)
    inputs = serializers.ListField(child=serializers.CharField())
    outputs = serializers.ListField(child=serializers.CharField())
    seed = serializers.IntegerField(allow_null=True)
    version = serializers.CharField()
    timestamp = serializers.DateTimeField()


def _first_error(errors, prefix=''):
    if isinstance(errors, dict):
        key, value = next(iter(errors.items()))
        if key == 'non_field_errors':
            key = ''
        path = '.'.join(part for part in (prefix, str(key)) if part)
        return _first_error(value, path)
    if isinstance(errors, (list, tuple)) and errors:
        nested = [item for item in errors if isinstance(item, (dict, list)) and item]
        if nested and not any(isinstance(item, str) for item in errors):
            return _first_error(nested[0], prefix)
        return prefix or 'config', str(errors[0])
    return prefix or 'config', str(errors)


def load_validated(serializer_class, data, **context):
    """Validate data and build the domain object, raising ConfigError naming the bad key."""
    if not isinstance(data, dict):
        raise ConfigError('config', 'expected a JSON object')
    serializer = serializer_class(data=data, context=context)
    if not serializer.is_valid():
        key, message = _first_error(serializer.errors)
        raise ConfigError(key, message)
    return serializer.save()
