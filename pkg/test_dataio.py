"""
Test Data I/O
Monitor and sensitivity files, posterior files, run config, synthetic data
and atomic writes
"""

from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from dataio import (
    COPULA_FILE,
    POSTERIOR_FILE,
    SyntheticSettings,
    atomic_directory,
    atomic_path,
    generate_synthetic,
    load_config,
    load_monitors,
    load_sensitivity,
    model_label,
    parse_model_label,
    read_copula,
    read_posterior,
    sensitivity_columns,
    write_copula,
    write_monitors,
    write_posterior,
    write_sensitivity,
    write_synthetic,
)
from dataio.synthetic import thinned_cells
from inference import CopulaFit, CopulaParams, MonitorDataset, PosteriorState
from src.errors import DataError, DuplicateKeyError, InputError, LinkError, ParseError
from src.seeding import STREAMS, substream
from tail import ConditionalModelParams, QuantileBasis

CONFIG_DIR = Path(__file__).parent / 'data' / 'config'
HEADER = "day,site_id,x_km,y_km,cell_id,o3_ppb\n"


def write_text(path, text):
    path.write_text(text)
    return path


# ---------------------------------------------------------------- monitors

def test_header_only_monitor_file(tmp_path):
    data = load_monitors(write_text(tmp_path / 'm.csv', HEADER))
    assert len(data) == 0
    assert data.n_sites == 0


def test_monitor_errors(tmp_path):
    rows = "0,A,1.0,2.0,c1,40\n1,A,1.0,2.0,c1,45\n"
    with pytest.raises(DuplicateKeyError):
        load_monitors(write_text(tmp_path / 'dup.csv', HEADER + rows + "0,A,1.0,2.0,c1,41\n"))

    with pytest.raises(ParseError) as err:
        load_monitors(write_text(tmp_path / 'bad.csv', HEADER + rows + "2,A,1.0,2.0,c1,50,9\n"))
    assert err.value.line_number == 4

    with pytest.raises(ParseError) as err:
        load_monitors(write_text(tmp_path / 'neg.csv', HEADER + rows + "2,A,1.0,2.0,c1,-3\n"))
    assert err.value.line_number == 4

    with pytest.raises(ParseError) as err:
        load_monitors(write_text(tmp_path / 'moved.csv', HEADER + rows + "2,A,9.0,2.0,c1,50\n"))
    assert err.value.line_number == 4

    with pytest.raises(ParseError) as err:
        load_monitors(write_text(tmp_path / 'hdr.csv', "day,site,x,y,cell,o3\n" + rows))
    assert err.value.line_number == 1

    with pytest.raises(FileNotFoundError):
        load_monitors(tmp_path / 'missing.csv')


def test_monitor_round_trip(tmp_path, tiny_synthetic):
    _, data, _ = tiny_synthetic
    back = load_monitors(write_monitors(data, tmp_path / 'monitors.csv'))
    np.testing.assert_array_equal(back.day, data.day)
    np.testing.assert_array_equal(back.site_ids, data.site_ids)
    np.testing.assert_array_equal(back.site, data.site)
    np.testing.assert_allclose(back.y, data.y, rtol=1e-15)
    np.testing.assert_allclose(back.site_xy, data.site_xy, rtol=1e-15)


# ---------------------------------------------------------------- sensitivity

def test_sensitivity_round_trip(tmp_path, tiny_synthetic):
    field, _, _ = tiny_synthetic
    back = load_sensitivity(write_sensitivity(field, tmp_path / 's.csv'))
    np.testing.assert_array_equal(back.cell_ids, field.cell_ids)
    for name in ('base', 'first_order', 'second_order_diag', 'second_order_cross', 'xy'):
        np.testing.assert_allclose(getattr(back, name), getattr(field, name), rtol=1e-15)


def test_sensitivity_column_names():
    assert sensitivity_columns(2)[5:] == ['s1_1', 's1_2', 's2_11', 's2_22', 's2_12']
    wide = sensitivity_columns(10)
    assert 's2_10_10' in wide and 's2_3_10' in wide and 's2_11' not in wide
    assert len(wide) == 5 + 10 + 10 + 45


def test_sensitivity_row_count(tmp_path, tiny_synthetic):
    field, _, _ = tiny_synthetic
    path = write_sensitivity(field, tmp_path / 's.csv')
    lines = path.read_text().splitlines(keepends=True)
    write_text(path, ''.join(lines[:-1]))
    with pytest.raises(DataError):
        load_sensitivity(path)


def test_link_errors(tiny_synthetic):
    field, data, _ = tiny_synthetic
    np.testing.assert_array_equal(data.link(field), field.cell_index(data.site_cell))
    stray = MonitorDataset([0], [0], [40.0], ['X'], [[0.0, 0.0]], ['nowhere'])
    with pytest.raises(LinkError):
        stray.link(field)
    late = MonitorDataset([field.n_days], [0], [40.0], ['X'], [[0.0, 0.0]], [field.cell_ids[0]])
    with pytest.raises(LinkError):
        late.link(field)


# ---------------------------------------------------------------- posterior files

def test_posterior_round_trip(tmp_path, tiny_synthetic):
    field, _, truth = tiny_synthetic
    draws = truth.as_draws(list(field.input_names))
    write_posterior(draws, tmp_path)
    back = read_posterior(tmp_path)
    assert back.names == draws.names
    np.testing.assert_array_equal(back.values, draws.values)
    np.testing.assert_array_equal(back.site_ids, draws.site_ids)
    assert back.template.model.use_gpd == draws.template.model.use_gpd

    frame = pd.read_csv(tmp_path / POSTERIOR_FILE)
    frame.drop(columns=frame.columns[-1]).to_csv(tmp_path / POSTERIOR_FILE, index=False)
    with pytest.raises(DataError):
        read_posterior(tmp_path)


def test_posterior_rows_must_match_manifest(tmp_path, tiny_synthetic):
    field, _, truth = tiny_synthetic
    draws = truth.as_draws(list(field.input_names))
    write_posterior(draws, tmp_path)
    frame = pd.read_csv(tmp_path / POSTERIOR_FILE)
    pd.concat([frame, frame]).to_csv(tmp_path / POSTERIOR_FILE, index=False)
    with pytest.raises(DataError, match="manifest"):
        read_posterior(tmp_path)


def test_copula_file(tmp_path):
    fit = CopulaFit(CopulaParams(2.0), 0.6, 100, 0.01, False, None)
    assert read_copula(write_copula(fit, tmp_path / COPULA_FILE)).phi == 2.0
    fallback = CopulaFit(CopulaParams(1e-3), np.nan, 0, np.nan, True, None)
    write_copula(fallback, tmp_path / 'fallback.yaml')
    assert "lag1_correlation: null" in (tmp_path / 'fallback.yaml').read_text()
    write_text(tmp_path / 'empty.yaml', "n_pairs: 3\n")
    with pytest.raises(DataError):
        read_copula(tmp_path / 'empty.yaml')


# ---------------------------------------------------------------- config

def test_config_defaults_and_overrides():
    config = load_config()
    assert (config.basis_functions, config.poly_order, config.use_gpd) == (4, 2, True)
    assert load_config(None, {'seed': 5, 'iterations': None}).iterations == 25000
    with pytest.raises(InputError):
        load_config(None, {'colour': 'red'})
    with pytest.raises(InputError):
        load_config(None, {'basis_functions': 3})
    with pytest.raises(InputError):
        load_config(None, {'iterations': 100, 'burn_in': 100})


def test_shipped_configs_load():
    for path in sorted(CONFIG_DIR.glob('*.yaml')):
        config = load_config(path)
        assert config.mcmc().burn_in < config.mcmc().iterations


def test_model_labels():
    assert model_label(4, 2, True) == 'L4_M2_GPD'
    assert parse_model_label('L1_M1_NoGPD') == (1, 1, False)
    for bad in ('L3_M1_GPD', 'L4_M0_GPD', 'L4M2'):
        with pytest.raises(InputError):
            parse_model_label(bad)


def test_require_files(tmp_path):
    config = load_config(None, {'monitors': str(tmp_path / 'nope.csv')})
    with pytest.raises(FileNotFoundError):
        config.require_files('monitors')


# ---------------------------------------------------------------- synthetic

def test_synthetic_deterministic(tiny_settings, tiny_synthetic):
    field, data, truth = generate_synthetic(tiny_settings, seed=3)
    np.testing.assert_array_equal(data.y, tiny_synthetic[1].y)
    np.testing.assert_array_equal(field.base, tiny_synthetic[0].base)
    assert len(data) == tiny_settings.n_sites * tiny_settings.n_days
    assert np.all(data.y >= 0)


def test_synthetic_files_byte_identical(tmp_path, tiny_synthetic):
    write_synthetic(tmp_path / 'a', *tiny_synthetic)
    write_synthetic(tmp_path / 'b', *tiny_synthetic)
    files = sorted(p.relative_to(tmp_path / 'a') for p in (tmp_path / 'a').rglob('*') if p.is_file())
    assert Path('truth.yaml') in files and Path('truth') / POSTERIOR_FILE in files
    for rel in files:
        assert (tmp_path / 'a' / rel).read_bytes() == (tmp_path / 'b' / rel).read_bytes()
    thinned = load_sensitivity(tmp_path / 'a' / 'sensitivity_thinned.csv')
    assert thinned.n_cells == len(thinned_cells(tiny_synthetic[2].settings)) == 9


def test_synthetic_moments_of_gaussian_truth():
    settings = SyntheticSettings(n_sites=20, grid_nx=6, grid_ny=6, n_days=90, n_inputs=2)
    model = ConditionalModelParams.zeros(QuantileBasis(1), 1, 20, use_gpd=False)
    model.beta[:, 0] = 50.0
    model.theta[:, 0, 0] = np.log(5.0)
    state = PosteriorState(np.zeros(2), model, np.zeros((2, 2)), np.ones((2, 2)), 100.0)
    _, data, _ = generate_synthetic(settings, seed=21, state=state)
    assert data.y.mean() == pytest.approx(50.0, abs=1.0)
    assert data.y.std() == pytest.approx(5.0, abs=0.5)


def test_synthetic_settings_validation():
    with pytest.raises(InputError):
        SyntheticSettings(n_sites=50, grid_nx=5, grid_ny=5)
    with pytest.raises(InputError):
        SyntheticSettings(true_phi=0.0)


def test_seed_streams():
    first = substream(7, 'synthetic').standard_normal(4)
    np.testing.assert_array_equal(first, substream(7, 'synthetic').standard_normal(4))
    assert not np.array_equal(first, substream(7, 'chain').standard_normal(4))
    assert not np.array_equal(substream(7, 'replicate', 0).random(3),
                              substream(7, 'replicate', 1).random(3))
    assert sorted(STREAMS) == ['chain', 'replicate', 'split', 'synthetic']
    with pytest.raises(KeyError):
        substream(7, 'params')


# ---------------------------------------------------------------- atomic writes

def test_failed_write_leaves_nothing(tmp_path):
    target = tmp_path / 'out.csv'
    with pytest.raises(RuntimeError):
        with atomic_path(target) as tmp:
            tmp.write_text("partial")
            raise RuntimeError("interrupted")
    assert list(tmp_path.iterdir()) == []


def test_staged_directory_created_by_rename(tmp_path):
    target = tmp_path / 'run'
    with atomic_directory(target) as stage:
        (stage / 'a.csv').write_text("a\n")
        (stage / 'b.yaml').write_text("b: 1\n")
    assert sorted(p.name for p in target.iterdir()) == ['a.csv', 'b.yaml']
    assert [p.name for p in tmp_path.iterdir()] == ['run']


def test_failed_staging_keeps_previous_run(tmp_path):
    target = tmp_path / 'run'
    target.mkdir()
    (target / 'a.csv').write_text("old\n")
    (target / 'manifest.yaml').write_text("n: 1\n")
    with pytest.raises(RuntimeError):
        with atomic_directory(target, last=('manifest.yaml',)) as stage:
            (stage / 'a.csv').write_text("new\n")
            raise RuntimeError("interrupted")
    assert (target / 'a.csv').read_text() == "old\n"
    assert (target / 'manifest.yaml').read_text() == "n: 1\n"
    assert [p.name for p in tmp_path.iterdir()] == ['run']


def test_staging_into_existing_directory(tmp_path):
    target = tmp_path / 'run'
    target.mkdir()
    (target / 'a.csv').write_text("old\n")
    (target / 'manifest.yaml').write_text("n: 1\n")
    (target / 'notes.txt').write_text("keep\n")
    with atomic_directory(target, last=('manifest.yaml',)) as stage:
        (stage / 'a.csv').write_text("new\n")
        (stage / 'manifest.yaml').write_text("n: 2\n")
    assert (target / 'a.csv').read_text() == "new\n"
    assert (target / 'manifest.yaml').read_text() == "n: 2\n"
    assert (target / 'notes.txt').read_text() == "keep\n"
    assert [p.name for p in tmp_path.iterdir()] == ['run']


if __name__ == "__main__":
    print("\n" + "=" * 60)
    print("DATA I/O TESTS")
    print("=" * 60)
    raise SystemExit(pytest.main([__file__, '-v']))
