import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from data_sources.csv_loader import export_csv, load_csv
from data_sources.dataset import Dataset
from data_sources.sampling import NoiseSpec, SplitSpec, dither, gaussian_variates, split
from data_sources.standardizer import fit_standardizer
from data_sources.water_table import load_builtin_water
from utils.errors import DataError


class TestWaterTable:
    """Test cases for the built-in saturated water table."""

    def test_density_endpoints(self, density):
        """First and last rows and the table size."""
        assert density.size == 22
        assert density.samples[0] == (273.15, 1000.0)
        assert density.samples[-1] == (373.15, 958.0)
        assert density.label == "original"

    @pytest.mark.parametrize("prop, temperature, value", [
        ("conductivity", 300.0, 0.613),
        ("specific_heat", 350.0, 4.195),
        ("density", 320.0, 989.0),
    ])
    def test_lookup(self, prop, temperature, value):
        data = load_builtin_water(prop)
        row = int(np.flatnonzero(data.x == temperature)[0])
        assert data.y[row] == value

    def test_aliases(self):
        assert load_builtin_water("rho").equals(load_builtin_water("density"))
        assert load_builtin_water("cp").equals(load_builtin_water("specific_heat"))
        assert load_builtin_water("k").equals(load_builtin_water("conductivity"))

    def test_unknown_property(self):
        with pytest.raises(DataError, match="viscosity"):
            load_builtin_water("viscosity")


class TestDataset:
    """Test cases for the Dataset container."""

    def test_arrays_are_read_only(self, density):
        with pytest.raises(ValueError):
            density.x[0] = 0.0

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(DataError):
            Dataset([1.0, 2.0], [1.0])

    def test_rejects_non_finite(self):
        with pytest.raises(DataError, match="row 2"):
            Dataset([1.0, float("nan")], [1.0, 2.0])

    def test_rejects_unknown_label(self):
        with pytest.raises(DataError):
            Dataset([1.0], [1.0], label="test")


class TestCsvLoader:
    """Test cases for CSV input and export."""

    def test_export_then_load(self, tmp_path, density):
        path = tmp_path / "density.csv"
        export_csv(density, path, x_column="T", y_column="value")
        loaded = load_csv(path, "T", "value")
        assert_array_equal(loaded.x, density.x)
        assert_array_equal(loaded.y, density.y)

    def test_non_numeric_cell_names_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("T,value\n280,1.0\n290,abc\n", encoding="utf-8")
        with pytest.raises(DataError, match="row 2"):
            load_csv(path, "T", "value")

    def test_non_finite_cell(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("T,value\n280,inf\n", encoding="utf-8")
        with pytest.raises(DataError, match="finite"):
            load_csv(path, "T", "value")

    def test_missing_column(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("T,value\n280,1.0\n", encoding="utf-8")
        with pytest.raises(DataError, match="rho"):
            load_csv(path, "T", "rho")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_csv(tmp_path / "missing.csv", "T", "value")


class TestSplit:
    """Test cases for the train/validation split."""

    def test_without_replacement(self, density):
        train, validate = split(density, SplitSpec(18, 6, seed=20240501))
        assert (train.size, validate.size) == (18, 6)
        assert train.label == "train" and validate.label == "validate"
        assert list(train.indices) == sorted(set(train.indices))
        assert not set(validate.indices) & set(train.indices)

    def test_deterministic(self, density):
        spec = SplitSpec(18, 6, seed=11)
        a, b = split(density, spec), split(density, spec)
        assert a[0].equals(b[0]) and a[1].equals(b[1])
        assert a[0].indices == b[0].indices

    def test_seed_changes_split(self, density):
        first = split(density, SplitSpec(18, 6, seed=1))[0].indices
        others = {split(density, SplitSpec(18, 6, seed=s))[0].indices for s in range(2, 8)}
        assert others != {first}

    def test_with_replacement_sizes(self, density):
        train, validate = split(density, SplitSpec(30, 10, mode="with_replacement", seed=3))
        assert (train.size, validate.size) == (30, 10)

    def test_full_training_split_refused(self, density):
        with pytest.raises(DataError, match="no rows for validation"):
            split(density, SplitSpec(22, 6))

    def test_oversized_split_refused(self, density):
        with pytest.raises(DataError, match="m1 <= m0"):
            split(density, SplitSpec(23, 6))

    def test_unknown_mode(self):
        with pytest.raises(DataError):
            SplitSpec(18, 6, mode="stratified")


class TestDither:
    """Test cases for target dithering."""

    def test_level_zero_is_identity(self, density):
        train, _ = split(density, SplitSpec(18, 6, seed=5))
        out = dither(train, NoiseSpec(0.0, seed=9))
        assert out.label == "dithered"
        assert_array_equal(out.y, train.y)

    def test_preserves_x_and_size(self, density):
        train, _ = split(density, SplitSpec(18, 6, seed=5))
        out = dither(train, NoiseSpec(0.05, seed=9))
        assert_array_equal(out.x, train.x)
        assert out.size == train.size
        assert not np.array_equal(out.y, train.y)

    def test_deterministic(self, density):
        train, _ = split(density, SplitSpec(18, 6, seed=5))
        assert dither(train, NoiseSpec(0.01, seed=9)).equals(dither(train, NoiseSpec(0.01, seed=9)))

    def test_sigma_scales(self):
        y = np.array([1.0, 2.0, 4.0, 8.0])
        var = np.var(y, ddof=1)
        assert NoiseSpec(0.01, scale="variance").sigma(y) == pytest.approx(np.sqrt(0.01 * var))
        assert NoiseSpec(0.01, scale="std").sigma(y) == pytest.approx(0.01 * np.sqrt(var))

    def test_gaussian_variates(self):
        z = gaussian_variates(123, 20000)
        assert np.all(np.isfinite(z))
        assert abs(z.mean()) < 0.05
        assert abs(z.std() - 1.0) < 0.03
        assert_array_equal(z[:10], gaussian_variates(123, 10))

    def test_negative_level_refused(self):
        with pytest.raises(DataError):
            NoiseSpec(-0.01)


class TestStandardizer:
    """Test cases for z-scoring and the coefficient map."""

    def test_transform_moments(self, density):
        std = fit_standardizer(density)
        z = std.transform(density)
        assert abs(z.x.mean()) < 1e-12 and abs(z.y.mean()) < 1e-12
        assert z.x.std() == pytest.approx(1.0)
        assert_allclose(std.inverse(z).y, density.y, rtol=1e-12)

    def test_coefficient_map_matches_predictions(self, density):
        std = fit_standardizer(density)
        a = np.array([0.3, -0.9, -0.12])
        c = std.params_to_raw(a)
        raw = np.polynomial.polynomial.polyval(density.x, c)
        assert_allclose(std.predict_raw(a, density.x), raw, rtol=1e-10)
        assert_allclose(std.params_from_raw(c), a, rtol=1e-8, atol=1e-10)

    def test_zero_variance_refused(self):
        with pytest.raises(DataError, match="zero variance"):
            fit_standardizer(Dataset([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]))
