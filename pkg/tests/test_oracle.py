import os
import json
import shutil
import warnings

import numpy as np

import morsedyn as md


def tmp():
    return os.path.join(os.getcwd(), 'tmp')


def make_tmp():
    os.makedirs(tmp(), exist_ok=True)


def delete_tmp():
    shutil.rmtree(tmp())


def test_oracle_element():
    p = md.no_params()
    assert abs(md.oracle_element(p, 3, 3, md.DipoleTerm(0, 1, 0)) - 1) < 1e-12
    assert abs(md.oracle_element(p, 3, 7, md.DipoleTerm(0, 1, 0))) < 1e-12
    # Linearity in a and d
    t = md.DipoleTerm(2.0, -0.5, 0.9)
    v = md.oracle_element(p, 4, 9, t)
    va = md.oracle_element(p, 4, 9, md.DipoleTerm(1, 0, 0.9))
    vd = md.oracle_element(p, 4, 9, md.DipoleTerm(0, 1, 0.9))
    assert abs(v - (2*va - 0.5*vd)) < 1e-12
    for m, n in [(-1, 0), (0, md.MAX_INDEX + 1)]:
        try:
            md.oracle_element(p, m, n, t)
        except ValueError:
            assert True
        else:
            assert False
    try:
        md.oracle_element(p, 0, 0, md.DipoleTerm(1, 0, -2*p.sigma))
    except ValueError:
        assert True
    else:
        assert False


def test_oracle_model_element():
    p = md.no_params()
    model = md.no_dipole_model()
    v = md.oracle_model_element(p, 2, 5, model)
    ref = sum(md.oracle_element(p, 2, 5, t) for t in model.terms)
    assert v == ref


def test_oracle_gram():
    p = md.no_params()
    G = md.oracle_gram(p, 20)
    assert G.shape == (21, 21)
    assert np.amax(np.abs(G - np.eye(21))) < 1e-8
    try:
        md.oracle_gram(p, md.MAX_INDEX + 1)
    except ValueError:
        assert True
    else:
        assert False


def test_bound_overlaps():
    p = md.no_params()
    O = md.bound_overlaps(p)
    assert O.shape == (55, 55)
    assert np.allclose(O.T @ O, np.eye(55), atol=1e-8)
    # Bound states lie in the span of the first floor(s)+1 basis functions
    O = md.bound_overlaps(p, 70)
    assert np.amax(np.abs(O[55:])) < 1e-8
    basis = md.diagonalize(md.h0_matrix(p, 70))
    assert np.allclose(np.abs(O[:55]), np.abs(basis.bound_vectors),
                       atol=1e-8)


def test_sample_indices():
    idx = md.sample_indices(60, 50, seed=0)
    assert idx == md.sample_indices(60, 50, seed=0)
    assert idx != md.sample_indices(60, 50, seed=1)
    assert all(0 <= m <= n <= 60 for m, n in idx)
    assert (0, 0) in idx and (60, 60) in idx
    assert len(idx) == len(set(idx))
    assert idx == sorted(idx)


def test_certify():
    p = md.no_params()
    model = md.no_dipole_model()
    report = md.certify(p, model, 60, sample_count=50, threshold=1e-6,
                        max_index=60)
    assert report.passed
    assert report.worst < 1e-6
    assert len(report.indices) >= 50
    d = report.to_dict()
    assert d['passed'] is True
    report.print_report()
    assert len(d['elements']) == len(report.indices)

    make_tmp()
    file = os.path.join(tmp(), 'certify.json')
    report.to_json(file)
    with open(file) as f:
        assert json.load(f)['worst_deviation'] == report.worst
    delete_tmp()


def test_oracle_doubling_nodes():
    p = md.no_params()
    # Polynomial integrands are exact at the default node count
    term = md.DipoleTerm(0, 1, 0.927)
    idx = md.sample_indices(30, 10, seed=1)
    q1 = [md.oracle_element(p, m, n, term) for m, n in idx]
    q2 = [md.oracle_element(p, m, n, term, npoints=2*(m + n + md.EXTRA_NODES))
          for m, n in idx]
    assert np.amax(md.relative_deviation(q2, q1)) < 1e-10
    # Logarithmic integrands on the strong nearest-neighbour elements
    term = md.DipoleTerm(1, 0, 0)
    for m in [0, 5, 10, 20, 30]:
        q1 = md.oracle_element(p, m, m + 1, term)
        q2 = md.oracle_element(p, m, m + 1, term,
                               npoints=2*(2*m + 1 + md.EXTRA_NODES))
        assert abs(q2 - q1) < 1e-10*abs(q1)


def test_relative_deviation():
    q = np.array([1.0, 0.5, 1e-6, 0.0])
    r = q + np.array([1e-7, 1e-7, 1e-7, 1e-7])
    dev = md.relative_deviation(r, q)
    assert np.allclose(dev, [1e-7, 2e-7, 1e-4, 1e-4], rtol=1e-6)


def test_certify_identity():
    p = md.no_params()
    model = md.DipoleModel([(0.0, 1.0, 0.0)])
    with warnings.catch_warnings():
        # The identity has no slope
        warnings.simplefilter('ignore')
        report = md.certify(p, model, 30, sample_count=20, threshold=1e-10,
                            max_index=30)
    assert report.passed
    assert report.worst < 1e-10


def test_certify_corrupted():
    p = md.no_params()
    model = md.no_dipole_model()
    mu = md.assemble_mu(p, model, 30)
    mu[15, 15] *= 1.01
    report = md.certify(p, model, 30, sample_count=20, max_index=30,
                        matrix=mu)
    assert not report.passed
    assert report.worst_index == (15, 15)


def test_certify_errors():
    p = md.no_params()
    model = md.no_dipole_model()
    for kwargs in [{'threshold': 0}, {'max_index': md.MAX_INDEX + 1}]:
        try:
            md.certify(p, model, 10, **kwargs)
        except ValueError:
            assert True
        else:
            assert False


if __name__ == "__main__":

    test_oracle_element()
    test_oracle_model_element()
    test_oracle_gram()
    test_bound_overlaps()
    test_sample_indices()
    test_certify()
    test_oracle_doubling_nodes()
    test_relative_deviation()
    test_certify_identity()
    test_certify_corrupted()
    test_certify_errors()

    print('All oracle tests passed!!')
