"""Base class for models with free parameters, and pickling helpers."""

import os
import pickle
import warnings

import numpy as np
from scipy.optimize import curve_fit


try:
    num_workers = len(os.sched_getaffinity(0))
except AttributeError:
    # sched_getaffinity is linux only
    num_workers = os.cpu_count()


class FitError(RuntimeError):
    """Raised when a least-squares fit fails.

    Attributes:
        residual_rms (float): RMS residual at the last parameter values, if
          it could be computed.
    """

    def __init__(self, msg, residual_rms=None):
        super().__init__(msg)
        self.residual_rms = residual_rms


class Model:
    """Model with a flat vector of free parameters.

    Subclasses implement `predict`, and `_getflat` and `_setflat` to read
    and write the free parameters as a 1D array.
    """

    def save(self, file=None, path=None, filename='Model'):
        """Pickle the model.

        Args:
            file (str, optional): full path of the file. Defaults to
              path/filename.
            path (str, optional): folder used when file is not given.
              Defaults to the current working directory.
            filename (str, optional): file name used when file is not
              given. Defaults to 'Model'.

        Returns:
            Model: the instance itself.

        Notes:
            The extension '.pkl' is added when missing.
        """
        return _save(self, _pickle_file(file, path, filename))

    def load(self, file=None, path=None, filename='Model'):
        """Overwrite the model with a pickled one. Arguments as in `save`.

        Returns:
            Model: the instance itself.
        """
        return _load(self, _pickle_file(file, path, filename))

    def predict(self, xdata):
        raise NotImplementedError(
            type(self).__name__ + ' does not implement predict.')

    def train(self, xdata, ydata, **kwargs):
        """Fit the free parameters to data, see `morsedyn.train`."""
        return train(self, xdata, ydata, **kwargs)

    def cost(self, xdata, ydata, metric='RMS') -> float:
        """Goodness of fit.

        Args:
            xdata (array-like): x-values.
            ydata (array-like): measured y-values.
            metric (str, optional): 'RMS' for the root-mean-square
              residual, 'max' for the largest absolute residual, 'AIC' or
              'BIC' for the information criteria. Defaults to 'RMS'.

        Returns:
            float: the metric.
        """
        return _cost(self, xdata, ydata, metric)

    def _getflat(self) -> np.ndarray:
        raise NotImplementedError(
            type(self).__name__ + ' does not implement _getflat.')

    def _setflat(self, vals: np.ndarray):
        raise NotImplementedError(
            type(self).__name__ + ' does not implement _setflat.')


def _pickle_file(file, path, filename):
    if file is None:
        file = os.path.join(os.getcwd() if path is None else path, filename)
    file = str(file)
    return file if file.endswith('.pkl') else file + '.pkl'


def _save(obj, file):
    with open(_pickle_file(file, None, None), 'wb') as f:
        pickle.dump(obj, f, protocol=pickle.HIGHEST_PROTOCOL)
    return obj


def _load(obj, file):
    with open(_pickle_file(file, None, None), 'rb') as f:
        saved = pickle.load(f)
    obj.__dict__.update(saved.__dict__)
    return obj


def train(model: Model, xdata, ydata, **kwargs) -> Model:
    """Least-squares fit of the free parameters of a model.

    The current free parameters are the initial values. On success the
    fitted values are kept and the covariance is stored in model.pcov.

    Args:
        model (Model): the model.
        xdata (array-like): x-values passed to model.predict.
        ydata (array-like): measured y-values.
        kwargs: passed to `scipy.optimize.curve_fit`.

    Raises:
        FitError: if there are fewer samples than free parameters, the fit
          does not converge, or the covariance is undefined.

    Returns:
        Model: the fitted model.
    """
    p0 = np.asarray(model._getflat(), dtype=float)
    ydata = np.asarray(ydata, dtype=float)
    if ydata.size < p0.size:
        raise FitError(
            str(p0.size) + ' free parameters cannot be fitted to '
            + str(ydata.size) + ' samples.')

    def predict(_, *p):
        model._setflat(np.array(p))
        return model.predict(xdata)

    try:
        with warnings.catch_warnings():
            # Singular covariances are checked below
            warnings.simplefilter('ignore')
            pars, pcov = curve_fit(predict, None, ydata, p0, **kwargs)
    except RuntimeError as e:
        model._setflat(p0)
        rms = _cost(model, xdata, ydata)
        raise FitError(
            'The fit did not converge (' + str(e) + '). RMS residual at '
            'the initial values: ' + str(rms) + '.', rms) from e
    model._setflat(pars)
    if not np.all(np.isfinite(pcov)):
        rms = _cost(model, xdata, ydata)
        raise FitError(
            'The Jacobian is singular at the solution, so the covariance '
            'of the parameters is undefined (RMS residual ' + str(rms)
            + ').', rms)
    model.pcov = pcov
    return model


def _cost(model, xdata, ydata, metric='RMS') -> float:
    res = model.predict(xdata) - np.asarray(ydata)
    n = res.size
    k = np.size(model._getflat())
    rss = float(np.sum(res**2))
    if metric == 'RMS':
        return float(np.sqrt(rss/n))
    if metric == 'max':
        return float(np.amax(np.abs(res)))
    with np.errstate(divide='ignore'):
        loglik = n*np.log(rss/n)
    if metric == 'AIC':
        return float(2*k + loglik)
    if metric == 'BIC':
        return float(k*np.log(n) + loglik)
    raise ValueError(
        str(metric) + ' is not a valid metric. Options are RMS, max, AIC '
        'or BIC.')
