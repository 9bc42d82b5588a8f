//! Python bindings: bid vectors, both auction mechanisms, matching, the
//! radio model and the experiment runners.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use engine::config::Config;
use engine::double_auction::{settle_double, DoubleInstance};
use engine::experiments::{self, Scenario};
use engine::matching::{self, WeightedBipartiteGraph};
use engine::radio_sim;
use engine::reverse_auction::{settle_reverse_with, ReverseInstance, WdSolver};
use engine::valuation::{FemtoValuationModel, SigmoidUtility};
use engine::error::AuctionError;

fn py_err(e: AuctionError) -> PyErr {
    match e {
        AuctionError::Invariant(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Cumulative price schedule `[0, b(1), ..., b(N)]`.
#[pyclass(name = "BidVector", module = "femto_auction", frozen, from_py_object)]
#[derive(Clone)]
struct PyBidVector {
    inner: engine::BidVector,
}

#[pymethods]
impl PyBidVector {
    #[new]
    fn new(prices: Vec<f64>) -> Self {
        PyBidVector {
            inner: engine::BidVector::new(prices),
        }
    }

    #[staticmethod]
    fn from_increments(increments: Vec<f64>) -> Self {
        PyBidVector {
            inner: engine::BidVector::from_increments(&increments),
        }
    }

    #[getter]
    fn prices(&self) -> Vec<f64> {
        self.inner.prices().to_vec()
    }

    #[getter]
    fn max_slots(&self) -> usize {
        self.inner.max_slots()
    }

    fn price(&self, n: usize) -> PyResult<f64> {
        if n > self.inner.max_slots() {
            return Err(PyValueError::new_err(format!("{n} slots exceeds {}", self.inner.max_slots())));
        }
        Ok(self.inner.price(n))
    }

    fn is_convex(&self) -> bool {
        self.inner.is_convex()
    }

    fn scaled(&self, factor: f64) -> Self {
        PyBidVector {
            inner: self.inner.scaled(factor),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.prices().len()
    }

    fn __repr__(&self) -> String {
        format!("BidVector({:?})", self.inner.prices())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

fn unwrap_bids(bids: Vec<PyBidVector>) -> Vec<engine::BidVector> {
    bids.into_iter().map(|b| b.inner).collect()
}

/// Sigmoid utility `U(r)` of a user with demand `demand_mbps`.
#[pyfunction]
#[pyo3(signature = (rate, demand_mbps, satisfaction = 1.0))]
fn utility(rate: f64, demand_mbps: f64, satisfaction: f64) -> PyResult<f64> {
    SigmoidUtility::new(satisfaction, demand_mbps)
        .and_then(|u| u.utility(rate))
        .map_err(py_err)
}

/// Truthful ask of a femtocell serving FUEs with the given demands and
/// full-frame rates.
#[pyfunction]
#[pyo3(signature = (demands_mbps, rates_mbps, slots, cap = None, satisfaction = 1.0))]
fn femto_bid_vector(
    demands_mbps: Vec<f64>,
    rates_mbps: Vec<f64>,
    slots: usize,
    cap: Option<usize>,
    satisfaction: f64,
) -> PyResult<PyBidVector> {
    let utilities = demands_mbps
        .iter()
        .map(|d| SigmoidUtility::new(satisfaction, *d))
        .collect::<Result<Vec<_>, _>>()
        .map_err(py_err)?;
    let model = FemtoValuationModel::new(utilities, rates_mbps, slots).map_err(py_err)?;
    let inner = model.truthful_bid_vector(cap.unwrap_or(slots)).map_err(py_err)?;
    Ok(PyBidVector { inner })
}

/// Single-MUE reverse auction. Settles against `values` (defaults to the
/// bids themselves, i.e. truthful reporting).
#[pyfunction]
#[pyo3(signature = (bids, rates_mbps, slots, macro_rate_mbps, demand_mbps, satisfaction = 1.0, values = None, solver = "exact"))]
#[allow(clippy::too_many_arguments)]
fn reverse_auction<'py>(
    py: Python<'py>,
    bids: Vec<PyBidVector>,
    rates_mbps: Vec<f64>,
    slots: usize,
    macro_rate_mbps: f64,
    demand_mbps: f64,
    satisfaction: f64,
    values: Option<Vec<PyBidVector>>,
    solver: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let solver = match solver {
        "exact" => WdSolver::Exact,
        "greedy" => WdSolver::Greedy,
        "exhaustive" => WdSolver::Exhaustive,
        other => return Err(PyValueError::new_err(format!("unknown solver {other:?}"))),
    };
    let u = SigmoidUtility::new(satisfaction, demand_mbps).map_err(py_err)?;
    let bids = unwrap_bids(bids);
    let values = values.map(unwrap_bids).unwrap_or_else(|| bids.clone());
    let inst = ReverseInstance::new(bids, rates_mbps, slots, macro_rate_mbps, u).map_err(py_err)?;
    let s = settle_reverse_with(&inst, &values, solver).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("slots", s.allocation.slots)?;
    out.set_item("efficiency", s.allocation.efficiency)?;
    out.set_item("payments", s.payments)?;
    out.set_item("utilities", s.utilities)?;
    out.set_item("mue_total_payment", s.mue_total_payment)?;
    out.set_item("mue_rate", s.mue_rate)?;
    out.set_item("mue_net_utility", s.mue_net_utility)?;
    Ok(out)
}

/// Multi-MUE double auction. `buyer_bids[i][j]` is MUE `i`'s bid for
/// femtocell `j`. True values default to the reports.
#[pyfunction]
#[pyo3(signature = (buyer_bids, seller_asks, slots, reserve_price = f64::NEG_INFINITY, buyer_values = None, seller_values = None))]
fn double_auction<'py>(
    py: Python<'py>,
    buyer_bids: Vec<Vec<PyBidVector>>,
    seller_asks: Vec<PyBidVector>,
    slots: usize,
    reserve_price: f64,
    buyer_values: Option<Vec<Vec<PyBidVector>>>,
    seller_values: Option<Vec<PyBidVector>>,
) -> PyResult<Bound<'py, PyDict>> {
    let bids: Vec<Vec<_>> = buyer_bids.into_iter().map(unwrap_bids).collect();
    let asks = unwrap_bids(seller_asks);
    let bv = buyer_values
        .map(|v| v.into_iter().map(unwrap_bids).collect())
        .unwrap_or_else(|| bids.clone());
    let sv = seller_values.map(unwrap_bids).unwrap_or_else(|| asks.clone());
    let inst = DoubleInstance::new(bids, asks, slots, reserve_price).map_err(py_err)?;
    let s = settle_double(&inst, &bv, &sv).map_err(py_err)?;
    let trades: Vec<(usize, usize, usize)> = s.executed().iter().map(|t| (t.buyer, t.seller, t.slots)).collect();
    let out = PyDict::new(py);
    out.set_item("trades", trades)?;
    out.set_item("efficiency", s.allocation.efficiency)?;
    out.set_item("buyer_payments", s.buyer_payments)?;
    out.set_item("seller_receipts", s.seller_receipts)?;
    out.set_item("buyer_utilities", s.buyer_utilities)?;
    out.set_item("seller_utilities", s.seller_utilities)?;
    out.set_item("budget_balance", s.budget_balance)?;
    out.set_item("terminated_by_reserve", s.terminated_by_reserve)?;
    Ok(out)
}

/// Maximum-weight bipartite matching of a buyers-by-sellers weight matrix.
/// Returns `(pairs, total_weight)`.
#[pyfunction]
fn max_weight_matching(weights: Vec<Vec<f64>>) -> PyResult<(Vec<(usize, usize)>, f64)> {
    let g = WeightedBipartiteGraph::from_rows(&weights).map_err(py_err)?;
    let m = matching::max_weight_matching(&g).map_err(py_err)?;
    Ok((m.pairs, m.total_weight))
}

#[pyfunction]
fn path_loss_macro(distance_m: f64) -> PyResult<f64> {
    radio_sim::path_loss_macro(distance_m).map_err(py_err)
}

#[pyfunction]
fn path_loss_femto(distance_m: f64) -> PyResult<f64> {
    radio_sim::path_loss_femto(distance_m).map_err(py_err)
}

#[pyfunction]
fn shannon_rate_mbps(bandwidth_mhz: f64, sinr: f64) -> f64 {
    radio_sim::shannon_rate_mbps(bandwidth_mhz, sinr)
}

fn load_config(config: Option<&str>, seed: Option<u64>) -> PyResult<Config> {
    let mut cfg = match config {
        Some(text) => Config::parse(text).map_err(py_err)?,
        None => Config::default(),
    };
    if let Some(s) = seed {
        cfg.experiment.seed = s;
    }
    cfg.validate().map_err(py_err)?;
    Ok(cfg)
}

/// Validates a flat TOML configuration and returns it fully resolved.
#[pyfunction]
#[pyo3(signature = (config = None, seed = None))]
fn resolve_config(config: Option<&str>, seed: Option<u64>) -> PyResult<String> {
    Ok(load_config(config, seed)?.to_flat_string())
}

/// Runs an experiment and returns `(records_csv, summary_csv)`. `kind` is
/// one of `single-mue`, `multi-mue`, `density`, `mue-count`, `demand` or
/// `truthfulness` (which has no summary; the second item is empty).
#[pyfunction]
#[pyo3(signature = (kind, config = None, seed = None))]
fn run_experiment(py: Python<'_>, kind: &str, config: Option<&str>, seed: Option<u64>) -> PyResult<(String, String)> {
    let cfg = load_config(config, seed)?;
    let kind = kind.to_string();
    py.detach(move || {
        let run = match kind.as_str() {
            "single-mue" => experiments::run_scenario(&cfg, Scenario::SingleMue),
            "multi-mue" => experiments::run_scenario(&cfg, Scenario::MultiMue),
            "density" => experiments::run_density_sweep(&cfg),
            "mue-count" => experiments::run_mue_count_sweep(&cfg),
            "demand" => experiments::run_demand_sweep(&cfg),
            "truthfulness" => {
                let records = experiments::run_truthfulness(&cfg).map_err(py_err)?;
                return Ok((experiments::records_csv(&records).map_err(py_err)?, String::new()));
            }
            other => return Err(PyValueError::new_err(format!("unknown experiment {other:?}"))),
        }
        .map_err(py_err)?;
        Ok((run.records_csv().map_err(py_err)?, run.summaries_csv().map_err(py_err)?))
    })
}

#[pymodule]
fn femto_auction(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBidVector>()?;
    m.add_function(wrap_pyfunction!(utility, m)?)?;
    m.add_function(wrap_pyfunction!(femto_bid_vector, m)?)?;
    m.add_function(wrap_pyfunction!(reverse_auction, m)?)?;
    m.add_function(wrap_pyfunction!(double_auction, m)?)?;
    m.add_function(wrap_pyfunction!(max_weight_matching, m)?)?;
    m.add_function(wrap_pyfunction!(path_loss_macro, m)?)?;
    m.add_function(wrap_pyfunction!(path_loss_femto, m)?)?;
    m.add_function(wrap_pyfunction!(shannon_rate_mbps, m)?)?;
    m.add_function(wrap_pyfunction!(resolve_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
