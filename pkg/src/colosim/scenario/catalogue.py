"""On-disk scenario catalogue: ``<dir>/<id>.rfscn`` and ``<dir>/<id>.tgen``."""

from pathlib import Path

from .errors import UnknownScenarioError
from .rfscn import read_rf_scenario, write_rf_scenario
from .tgen import read_traffic_script, serialize_traffic_script


class Catalogue:
    """Read side is side-effect free; installs write whole files."""

    def __init__(self, directory):
        self.directory = Path(directory)

    def _rf_path(self, scenario_id):
        return self.directory / f"{scenario_id}.rfscn"

    def _traffic_path(self, scenario_id):
        return self.directory / f"{scenario_id}.tgen"

    def rf_ids(self):
        if not self.directory.is_dir():
            return []
        return sorted(p.stem for p in self.directory.glob("*.rfscn"))

    def traffic_ids(self):
        if not self.directory.is_dir():
            return []
        return sorted(p.stem for p in self.directory.glob("*.tgen"))

    def has_rf(self, scenario_id):
        return self._rf_path(scenario_id).is_file()

    def has_traffic(self, scenario_id):
        return self._traffic_path(scenario_id).is_file()

    def load_rf(self, scenario_id):
        p = self._rf_path(scenario_id)
        if not p.is_file():
            raise UnknownScenarioError(f"no RF scenario {scenario_id!r} in {self.directory}")
        return read_rf_scenario(p)

    def load_traffic(self, scenario_id):
        p = self._traffic_path(scenario_id)
        if not p.is_file():
            raise UnknownScenarioError(f"no traffic scenario {scenario_id!r} in {self.directory}")
        return read_traffic_script(p, scenario_id)

    def list(self):
        """One summary per RF scenario: id, n_nodes, duration_ms, carrier_hz."""
        return [self.load_rf(i).summary() for i in self.rf_ids()]

    def info(self, scenario_id):
        d = self.load_rf(scenario_id).info()
        d["traffic_available"] = self.has_traffic(scenario_id)
        return d

    def install_rf(self, scenario):
        self.directory.mkdir(parents=True, exist_ok=True)
        p = self._rf_path(scenario.id)
        write_rf_scenario(p, scenario)
        return p

    def install_traffic(self, scenario):
        self.directory.mkdir(parents=True, exist_ok=True)
        p = self._traffic_path(scenario.id)
        p.write_text(serialize_traffic_script(scenario), encoding="utf-8")
        return p


def catalogue_list(directory):
    return Catalogue(directory).list()


def catalogue_info(directory, scenario_id):
    return Catalogue(directory).info(scenario_id)
