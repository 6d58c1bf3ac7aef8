import numpy as np
import pytest

from paraqa.tensornet import ParamStore, backward, no_grad


def finite_diff_check(store: ParamStore, loss_fn, eps=1e-4, tol=1e-3,
                      names=None, max_coords=None, rng=None, fast_fn=None):
    """Compare analytic gradients of ``loss_fn()`` against central differences.

    ``loss_fn`` must rebuild the graph from the store's current values and
    return a scalar Tensor.  When ``fast_fn`` (a float-returning twin) is
    given, it is used for the probe evaluations after asserting that it
    reproduces the taped loss bitwise.  Returns the worst relative error.
    """
    store.zero_grad()
    loss = loss_fn()
    backward(loss)
    grads = {n: (store[n].grad.copy() if store[n].grad is not None
                 else np.zeros_like(store[n].data))
             for n in store.trainable_names()}

    if fast_fn is not None:
        assert fast_fn() == loss.item(), \
            "fast loss twin diverges from the taped loss"
        probe = fast_fn
    else:
        def probe():
            with no_grad():
                return loss_fn().item()

    worst = 0.0
    for name in (names if names is not None else store.trainable_names()):
        data = store[name].data
        flat = data.reshape(-1)
        coords = np.arange(flat.size)
        if max_coords is not None and flat.size > max_coords:
            coords = (rng or np.random.default_rng(0)).choice(
                flat.size, size=max_coords, replace=False)
        for j in coords:
            orig = flat[j]
            flat[j] = orig + eps
            up = probe()
            flat[j] = orig - eps
            down = probe()
            flat[j] = orig
            fd = (up - down) / (2 * eps)
            an = grads[name].reshape(-1)[j]
            rel = abs(an - fd) / max(abs(an), abs(fd), 1e-5)
            worst = max(worst, rel)
            assert rel < tol, (
                f"gradient mismatch for {name}[{j}]: analytic={an:.8g} "
                f"fd={fd:.8g} rel={rel:.3g}"
            )
    return worst


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
