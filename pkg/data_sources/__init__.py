from data_sources.dataset import Dataset, SamplePair
from data_sources.water_table import load_builtin_water, PROPERTIES
from data_sources.csv_loader import load_csv, export_csv
from data_sources.sampling import SplitSpec, NoiseSpec, split, dither
from data_sources.standardizer import Standardizer, fit_standardizer

__all__ = [
    "Dataset", "SamplePair", "load_builtin_water", "PROPERTIES", "load_csv", "export_csv",
    "SplitSpec", "NoiseSpec", "split", "dither", "Standardizer", "fit_standardizer",
]
