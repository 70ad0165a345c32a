"""Figure reproduction: drives the presets and writes every curve needed to re-plot a figure.

Each figure id maps to one phase method that writes CSV files into its own
directory under the output root, followed by a manifest.json listing them.
"""

import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from Utils.csv_io import atomic_write, save_curve_csv, save_table_csv
from Utils.errors import UsageError
from .embedding import EmbeddingConfig
from .pipeline import (ARTIFACT_VERSION, AnalysisConfig, ResultBundle, label_stem, run_pipeline,
                       run_realizations, save_bundle)
from .shift_scan import ShiftRange, average_curves, coordinate_average
from .simulators import PRESETS, WILSON_COWAN_PRESET, LorenzConfig, create_simulator, create_simulator_from_config
from .spectral import SpectralConfig, coherence
from .sweeps import SweepPoint, coupling_sweep, embedding_sweep, length_sweep, noise_sweep, summarize_sweep
from .timeseries import TimeSeries

FIGURES = ("fig2", "fig3", "fig4", "fig4a", "fig4b", "fig4c", "fig5", "fig6", "fig7", "fig8")

LOGISTIC_SHIFTS = ShiftRange(-20, 20, 1)
FIG2_LIBRARY_LENGTHS = (10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 9000)
LORENZ_RECORD_EVERY = 100
LORENZ_SHIFT_SECONDS = 2.0
KURAMOTO_SHIFT_SECONDS = 0.1
KURAMOTO_POINTS = 10000
WILSON_COWAN_SHIFT_SECONDS = 0.2

# Independent pairs score near twice the chance coherence, which falls as one
# over the square root of the number of Welch segments averaged.
LOGISTIC_SPECTRAL = SpectralConfig(segment_length=8)
LORENZ_SPECTRAL = SpectralConfig(segment_length=16)
KURAMOTO_SPECTRAL = SpectralConfig(segment_length=32)
# Neighbours closer in time than this share the target's own history
LORENZ_EXCLUSION_RADIUS = 50
WILSON_COWAN_BANDS = ((1.0, 20.0), (20.0, 50.0))


class FigureReproducer:
    def __init__(self, output_dir: Path, base_config: Optional[AnalysisConfig] = None,
                 weights_path: Optional[Path] = None, workers: Optional[int] = None):
        self.output_dir = Path(output_dir)
        self.base_config = base_config or AnalysisConfig()
        self.weights_path = Path(weights_path) if weights_path else None
        self.workers = workers
        self.phases: Dict[str, Callable[[Path], List[Path]]] = {
            "fig2": self.reproduce_ccm_overview,
            "fig3": self.reproduce_logistic_scenarios,
            "fig4a": self.reproduce_length_study,
            "fig4b": self.reproduce_coupling_study,
            "fig4c": self.reproduce_noise_study,
            "fig5": self.reproduce_embedding_study,
            "fig6": self.reproduce_lorenz,
            "fig7": self.reproduce_kuramoto,
            "fig8": self.reproduce_wilson_cowan,
        }

    def _config(self, **changes) -> AnalysisConfig:
        return replace(self.base_config, **changes)

    def _logistic_config(self, **changes) -> AnalysisConfig:
        return self._config(embedding=EmbeddingConfig(2, 1), shift_range=LOGISTIC_SHIFTS,
                            spectral=LOGISTIC_SPECTRAL, **changes)

    def run(self, figure_id: str) -> List[Path]:
        """Reproduce one figure and return the files written, manifest last"""
        if figure_id not in FIGURES:
            raise UsageError(f"Unknown figure: {figure_id}. Available: {', '.join(FIGURES)}")

        target = self.output_dir / figure_id
        logging.info(f"Reproducing {figure_id} into {target}")
        if figure_id == "fig4":
            written = []
            for part in ("fig4a", "fig4b", "fig4c"):
                written += self.phases[part](target / part)
        else:
            written = self.phases[figure_id](target)

        manifest = self._write_manifest(target, figure_id, written)
        logging.info(f"{figure_id}: {len(written)} files, manifest at {manifest}")
        return written + [manifest]

    def _write_manifest(self, target: Path, figure_id: str, files: Sequence[Path]) -> Path:
        cfg = self.base_config
        manifest = {
            "figure": figure_id,
            "version": ARTIFACT_VERSION,
            "seed": cfg.seed,
            "config_hash": cfg.config_hash(),
            "files": sorted(str(Path(f).relative_to(target)) for f in files),
        }
        return atomic_write(target / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    def _save_sweep(self, target: Path, points: Sequence[SweepPoint]) -> List[Path]:
        written = []
        for point in points:
            written += save_bundle(point.bundle, target, prefix=f"{point.parameter}_{point.value:g}_")
        bundle = points[0].bundle
        columns = [points[0].parameter, f"{bundle.forward.label}_mean_strength",
                   f"{bundle.backward.label}_mean_strength"]
        written.append(save_table_csv(target / "summary.csv", columns, summarize_sweep(points),
                                      bundle.provenance))
        return written

    def reproduce_ccm_overview(self, target: Path) -> List[Path]:
        """Convergence in library length and the CCM function of the unidirectional logistic pair"""
        x, y = create_simulator("logistic-uni").simulate()
        cfg = self._logistic_config(library_lengths=FIG2_LIBRARY_LENGTHS)
        return save_bundle(run_pipeline(cfg, x, y, self.workers), target)

    def reproduce_logistic_scenarios(self, target: Path) -> List[Path]:
        """Unidirectional, circular, hidden-driver and independent logistic pairs"""
        cfg = self._logistic_config()
        written = []
        for scenario in ("uni", "circ", "hidden", "indep"):
            x, y = create_simulator(f"logistic-{scenario}").simulate()[:2]
            bundle = run_pipeline(cfg, x, y, self.workers)
            written += save_bundle(bundle, target, prefix=f"{scenario}_")
        return written

    def reproduce_length_study(self, target: Path) -> List[Path]:
        cfg = self._logistic_config()
        return self._save_sweep(target, length_sweep(cfg, workers=self.workers))

    def reproduce_coupling_study(self, target: Path) -> List[Path]:
        cfg = self._logistic_config()
        return self._save_sweep(target, coupling_sweep(cfg, workers=self.workers))

    def reproduce_noise_study(self, target: Path) -> List[Path]:
        cfg = self._logistic_config()
        return self._save_sweep(target, noise_sweep(cfg, workers=self.workers))

    def reproduce_embedding_study(self, target: Path) -> List[Path]:
        cfg = self._logistic_config()
        return self._save_sweep(target, embedding_sweep(cfg, workers=self.workers))

    def reproduce_lorenz(self, target: Path) -> List[Path]:
        """x1/x2 of the coupled Lorenz systems, decimated by 100 while integrating"""
        written = []
        for scenario in ("uni", "circ", "indep"):
            config: LorenzConfig = replace(PRESETS[f"lorenz-{scenario}"], record_every=LORENZ_RECORD_EVERY)
            simulator = create_simulator_from_config(config)
            series = {s.name: s for s in simulator.simulate()}
            shifts = ShiftRange.from_seconds(-LORENZ_SHIFT_SECONDS, LORENZ_SHIFT_SECONDS, simulator.sample_rate)
            cfg = self._config(embedding=EmbeddingConfig(7, 1), shift_range=shifts, spectral=LORENZ_SPECTRAL,
                               exclusion_radius=LORENZ_EXCLUSION_RADIUS)
            bundle = run_pipeline(cfg, series["x1"], series["x2"], self.workers)
            written += save_bundle(bundle, target, prefix=f"{scenario}_")
        return written

    def reproduce_kuramoto(self, target: Path) -> List[Path]:
        """Driver z against x and y, the mutually coupled x-y pair, and plain coherence of each pair"""
        simulator = create_simulator("kuramoto-3")
        series = {s.name: s.head(KURAMOTO_POINTS) for s in simulator.simulate()}
        shifts = ShiftRange.from_seconds(-KURAMOTO_SHIFT_SECONDS, KURAMOTO_SHIFT_SECONDS, simulator.sample_rate)
        cfg = self._config(embedding=EmbeddingConfig(5, 1), shift_range=shifts, spectral=KURAMOTO_SPECTRAL)

        written = []
        pairs: Tuple[Tuple[str, str], ...] = (("z", "x"), ("z", "y"), ("x", "y"))
        for a, b in pairs:
            bundle = run_pipeline(cfg, series[a], series[b], self.workers)
            written += save_bundle(bundle, target, prefix=f"{a}{b}_")

        for a, b in pairs:
            curve = coherence(series[a], series[b], cfg.spectral)
            written.append(save_table_csv(target / f"coherence_{a}_{b}.csv", ["frequency_hz", "coherence"],
                                          zip(curve.frequencies, curve.coherence), cfg.provenance()))
        return written

    def reproduce_wilson_cowan(self, target: Path) -> List[Path]:
        """Realization-averaged V1/V4 analysis from a user weight file"""
        if self.weights_path is None:
            raise UsageError("fig8 needs a Wilson-Cowan weight file; pass --weights (see Configs/)")
        simulator = create_simulator(WILSON_COWAN_PRESET, self.weights_path)
        realizations = [simulator.area_signals(run) for run in simulator.simulate_realizations()]
        if len(realizations[0]) != 2:
            raise UsageError(f"fig8 needs exactly two areas in the weight file, got {len(realizations[0])}")

        shifts = ShiftRange.from_seconds(-WILSON_COWAN_SHIFT_SECONDS, WILSON_COWAN_SHIFT_SECONDS,
                                         simulator.sample_rate)
        cfg = self._config(embedding=EmbeddingConfig(9, 1), shift_range=shifts, normalization=True,
                           realizations=len(realizations))
        pairs = [(areas[0], areas[1]) for areas in realizations]
        bundle = run_realizations(cfg, pairs, self.workers)
        written = save_bundle(bundle, target)
        written += self._coordinate_curves(target, cfg, pairs, bundle)
        written.append(self._band_split(target, bundle))
        return written

    def _band_split(self, target: Path, bundle: ResultBundle) -> Path:
        """Strength integrated over the low and high bands, per direction, raw and normalized"""
        columns = ["direction", "profile"] + [f"band_{lo:g}_{hi:g}_hz" for lo, hi in WILSON_COWAN_BANDS]
        rows = []
        for direction in bundle.directions():
            for kind, profile in (("raw", direction.profile), ("normalized", direction.profile_normalized)):
                integrals = [profile.band_integral(lo, hi) for lo, hi in WILSON_COWAN_BANDS]
                rows.append([direction.label, kind] + integrals)
                logging.info(f"{direction.label} {kind}: " + ", ".join(
                    f"{lo:g}-{hi:g} Hz {value:.4f}" for (lo, hi), value in zip(WILSON_COWAN_BANDS, integrals)))
        return save_table_csv(target / "band_split.csv", columns, rows, bundle.provenance)

    def _coordinate_curves(self, target: Path, cfg: AnalysisConfig,
                           pairs: Sequence[Tuple[TimeSeries, TimeSeries]], bundle: ResultBundle) -> List[Path]:
        """CCM functions for the first and last delay coordinate and their mean over all coordinates"""
        written = []
        for direction, (cause_at, effect_at) in zip(bundle.directions(), ((0, 1), (1, 0))):
            per_realization = [coordinate_average(pair[effect_at], pair[cause_at], cfg.embedding, cfg.shift_range,
                                                  None, cfg.neighbors, cfg.exclusion_radius, self.workers)
                               for pair in pairs]
            first = average_curves([scans[0].ccm for scans in per_realization])
            last = average_curves([scans[-1].ccm for scans in per_realization])
            mean = average_curves([average_curves([s.ccm for s in scans]) for scans in per_realization])
            stem = label_stem(direction.label)
            for name, curve in (("first", first), ("last", last), ("mean", mean)):
                written.append(save_curve_csv(target / f"{stem}_ccm_coordinate_{name}.csv", curve,
                                              bundle.provenance))
        return written


def reproduce_figure(figure_id: str, output_dir: Path, base_config: Optional[AnalysisConfig] = None,
                     weights_path: Optional[Path] = None, workers: Optional[int] = None) -> List[Path]:
    return FigureReproducer(output_dir, base_config, weights_path, workers).run(figure_id)
