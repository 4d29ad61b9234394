"""Bundle discovery and loading, packaged and from the filesystem."""

import shutil
from pathlib import Path

import pytest

from planwalk.bundle import BundleError, environment_spec, list_bundled, load_bundle

BUNDLE_SRC = Path(__file__).resolve().parents[1] / "src" / "planwalk" / "envs"


def test_list_bundled_names():
    names = list_bundled()
    assert "grippers" in names and "grippers-ood" in names


def test_grippers_bundle_shape(grippers):
    assert grippers.n_problems == 3
    assert grippers.plans[0] is not None
    assert grippers.plans[1] is None and grippers.plans[2] is None
    assert grippers.domain_nl and grippers.problem_nls[0]
    assert len(grippers.problem_template_texts) == 3


def test_ood_bundle_renames_everything(grippers_ood):
    assert grippers_ood.n_problems == 2
    assert [a.name for a in grippers_ood.domain.actions] == ["glide", "grab", "release"]


def test_load_from_filesystem_path(tmp_path):
    target = tmp_path / "copy"
    shutil.copytree(BUNDLE_SRC / "grippers", target)
    bundle = load_bundle(str(target))
    assert bundle.n_problems == 3
    assert bundle.name == "grippers"


def test_manifest_problem_count_is_enforced(tmp_path):
    target = tmp_path / "broken"
    shutil.copytree(BUNDLE_SRC / "grippers", target)
    (target / "problems" / "p03.pddl").unlink()
    with pytest.raises(BundleError):
        load_bundle(str(target))


def test_unknown_bundle_name(tmp_path):
    with pytest.raises(BundleError):
        load_bundle("no-such-bundle")
    with pytest.raises(BundleError):
        load_bundle(str(tmp_path / "missing"))


def test_environment_spec_pairs_handles_with_problems(grippers):
    spec = environment_spec(grippers)
    assert spec.n_problems == 3
    assert len(spec.handles) == 3
    assert spec.domain_template.name == grippers.domain.name
