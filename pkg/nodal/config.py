"""
Experiment configuration: YAML files validated by the DRF serializers in
``nodal.serializers`` and frozen into an :class:`ExperimentConfig`.
"""
import copy
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from django.conf import settings
from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from .exceptions import ConfigInvalid
from .field import EpsParams
from .flow import FlowConfig
from .manifold import TorusManifold
from .serializers import ExperimentConfigSerializer

logger = logging.getLogger(__name__)


def _plain(data):
    """Serializer output (OrderedDicts, ReturnLists) as plain JSON-ready containers."""
    if isinstance(data, dict):
        return {key: _plain(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [_plain(value) for value in data]
    if isinstance(data, str):
        return str(data)
    return data


@dataclass(frozen=True)
class ExperimentConfig:
    data: dict = field(repr=False)
    source: Path = None

    @classmethod
    def from_dict(cls, data, source=None):
        serializer = ExperimentConfigSerializer(data=data)
        if not serializer.is_valid():
            raise ConfigInvalid(_plain(serializer.errors))
        return cls(data=_plain(serializer.validated_data), source=source)

    @property
    def name(self):
        if self.data.get('name'):
            return self.data['name']
        return self.source.stem if self.source else "experiment"

    @property
    def schema_version(self):
        return self.data['schema_version']

    @cached_property
    def manifold(self):
        section = self.data['manifold']
        return TorusManifold(tuple(section['lengths']), tuple(section['grid_sizes']))

    @property
    def m(self):
        return self.data['params']['m']

    @property
    def eps_list(self):
        return tuple(self.data['params']['eps'])

    def params(self, eps):
        return EpsParams.for_manifold(self.manifold, eps, self.m)

    def flow_config(self, alpha=1.0):
        section = self.data['flow']
        return FlowConfig(
            step=section['step'],
            backtrack=section['backtrack'],
            max_steps=section['max_steps'],
            stop_delta=section['stop_delta'],
            alpha=alpha,
            solver_tol=section['solver_tol'],
            part_floor=section['part_floor'],
            collapse_floor=section['collapse_floor'],
        )

    @property
    def polish_steps(self):
        return self.data['flow']['polish_steps']

    @property
    def groundstate(self):
        return self.data['groundstate']

    @property
    def seeds(self):
        return self.data['seeds']

    @property
    def concentration(self):
        return self.data['concentration']

    @property
    def clustering(self):
        return self.data['clustering']

    @property
    def checks(self):
        return self.data['checks']

    @property
    def output_dir(self):
        configured = self.data['output']['dir']
        if configured:
            return Path(configured)
        return Path(settings.NODAL_LAB['OUTPUT_DIR']) / self.name

    def with_overrides(self, eps=None, seeds=None, out=None):
        """Re-validated copy with the command-line overrides applied."""
        data = copy.deepcopy(self.data)
        if eps:
            data['params']['eps'] = [float(value) for value in eps]
        if seeds is not None:
            data['seeds']['count'] = int(seeds)
        if out is not None:
            data['output']['dir'] = str(out)
        return ExperimentConfig.from_dict(data, source=self.source)


def load_config(path):
    """Load and validate a YAML experiment file."""
    source = Path(path)
    yaml = YAML(typ="safe")
    try:
        with source.open("r", encoding="utf-8") as fh:
            data = yaml.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read {source}: {exc}") from exc
    except YAMLError as exc:
        raise ConfigInvalid(f"{source} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigInvalid(f"{source} must hold a mapping at the top level.")
    config = ExperimentConfig.from_dict(data, source=source.resolve())
    logger.debug("loaded config %s (eps=%s)", source, config.eps_list)
    return config
