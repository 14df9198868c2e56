# --- Flask Application for reduced Khovanov homology and width computations ---
#
# This app exposes the braid-closure and twist-knot computations as JSON endpoints.
# All computation lives in the library modules. This file wires up the routes.

from flask import Flask, request, jsonify
import logging
from typing import Dict, Tuple

from config import Config
from validators import InputValidator, ValidationError
from diagrams import DiagramError, PlanarDiagram, braid_from_text, closure
from khovanov import ResourceLimitError, determinant, jones, kh_reduced, width
from perturbed import bn_homology_rank, lee_lower_bound_check
from cones import ConeError, cone_page, e1_dominates, e1_page
from twistlab import finite_filling_report, require_engine, tau, tau_rational
from figures import verify_figure

app = Flask(__name__)
app.config.from_object(Config)

# Console shows INFO by default. Use env CONSOLE_LOG_LEVEL to override.
console_level = Config.CONSOLE_LOG_LEVEL

console_handler = logging.StreamHandler()
console_handler.setLevel(console_level)
console_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
handlers = [console_handler]

if Config.LOG_FILE:
    file_handler = logging.FileHandler(Config.LOG_FILE)
    file_handler.setLevel(Config.FILE_LOG_LEVEL)
    file_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
    handlers.append(file_handler)

logging.basicConfig(level=getattr(logging, console_level, logging.INFO), handlers=handlers)
logger = logging.getLogger(__name__)

ROUTES = {
    '/api/kh': 'reduced Khovanov table of a braid closure (braid)',
    '/api/width': 'homological width (braid)',
    '/api/jones': 'Jones polynomial read off the table (braid)',
    '/api/det': 'determinant (braid)',
    '/api/turner': 'perturbed diagonal ranks and the lower-bound check (braid)',
    '/api/cone': 'skein cone at a positive crossing (braid, crossing)',
    '/api/e1': 'E1 page of iterated resolutions (braid, crossings)',
    '/api/twistknot': 'branch set of a twist-knot surgery (t, framing or slope, action)',
    '/api/verdict/<t>': 'finite-filling verdict',
    '/api/verify/<figure>': 'figure regression check (t)',
}


def _params() -> Dict:
    """Query parameters merged with an optional JSON body."""
    data = dict(request.args.items())
    if request.is_json:
        data.update(request.get_json(silent=True) or {})
    return data


def _braid_diagram(data: Dict) -> Tuple[PlanarDiagram, str]:
    text = data.get('braid', '')
    is_valid, error_msg, _ = InputValidator.validate_braid_text(text)
    if not is_valid:
        raise ValidationError(error_msg)
    return closure(braid_from_text(text)), text


def _failure(error: Exception):
    if isinstance(error, (ValidationError, DiagramError, ConeError)):
        return jsonify({"success": False, "error": str(error)}), 400
    if isinstance(error, ResourceLimitError):
        return jsonify({"success": False, "error": str(error)}), 422
    logger.error(f"Computation failed: {error}")
    return jsonify({"success": False, "error": str(error)}), 500


def _diagram_payload(action: str, diagram: PlanarDiagram, label: str) -> Dict:
    if action == 'turner':
        _, diagonals = bn_homology_rank(diagram)
        report = lee_lower_bound_check(kh_reduced(diagram), diagonals)
        return {"input": label, **diagonals.to_json(), "lower_bound": report.to_json()}
    table = kh_reduced(diagram)
    if action == 'kh':
        return {"input": label, "table": table.to_json(), "ascii": table.ascii()}
    if action == 'width':
        return {"input": label, "width": width(table)}
    if action == 'jones':
        polynomial = jones(table)
        return {"input": label, "jones": polynomial.to_json(), "text": str(polynomial)}
    return {"input": label, "det": determinant(table)}


@app.route('/', methods=['GET'])
def index():
    """List the available routes."""
    return jsonify({"success": True, "routes": ROUTES})


@app.route('/api/<action>', methods=['GET', 'POST'])
def braid_invariant(action):
    """Table-derived invariants of a braid closure."""
    if action not in InputValidator.TWISTKNOT_ACTIONS:
        return jsonify({"success": False, "error": "Endpoint not found"}), 404
    try:
        diagram, label = _braid_diagram(_params())
        return jsonify({"success": True, **_diagram_payload(action, diagram, label)})
    except Exception as e:
        return _failure(e)


@app.route('/api/cone', methods=['GET', 'POST'])
def cone():
    """Mapping cone at one positive crossing, checked against the exact table."""
    try:
        data = _params()
        diagram, label = _braid_diagram(data)
        try:
            crossing = int(data.get('crossing'))
        except (TypeError, ValueError):
            raise ValidationError("crossing must be an integer")
        page = cone_page(diagram, crossing)
        report = e1_dominates(page, kh_reduced(diagram))
        return jsonify({"success": True, "input": label, "c": page.constants[0],
                        "page": page.to_json(), "report": report.to_json()})
    except Exception as e:
        return _failure(e)


@app.route('/api/e1', methods=['GET', 'POST'])
def e1():
    """E1 page of iterated resolutions at the given crossings."""
    try:
        data = _params()
        text = data.get('braid', '')
        braid = braid_from_text(text)
        is_valid, error_msg, crossings = InputValidator.validate_crossing_ids(data.get('crossings'), len(braid))
        if not is_valid:
            raise ValidationError(error_msg)
        page = e1_page(braid, crossings)
        report = e1_dominates(page, kh_reduced(closure(braid)))
        return jsonify({"success": True, "input": text, "page": page.to_json(), "report": report.to_json()})
    except Exception as e:
        return _failure(e)


@app.route('/api/twistknot', methods=['GET', 'POST'])
def twistknot():
    """Table, width or determinant of an integral or rational twist-knot branch set."""
    try:
        is_valid, error_msg, cleaned = InputValidator.validate_twistknot_request(_params())
        if not is_valid:
            raise ValidationError(error_msg)
        t, p, q = cleaned['t'], cleaned['p'], cleaned['q']
        require_engine(t)
        if q == 1:
            diagram, label = tau(t, p), f"tau_{t}({p})"
        else:
            diagram, label = tau_rational(t, p, q), f"tau_{t}({p}/{q})"
        return jsonify({"success": True, **_diagram_payload(cleaned['action'], diagram, label)})
    except Exception as e:
        return _failure(e)


@app.route('/api/verdict/<t>', methods=['GET'])
def verdict(t):
    """Finite-filling verdict for K_t."""
    try:
        is_valid, error_msg, value = InputValidator.validate_twist_parameter(t)
        if not is_valid:
            raise ValidationError(error_msg)
        return jsonify({"success": True, **finite_filling_report(value).to_json()})
    except Exception as e:
        return _failure(e)


@app.route('/api/verify/<figure>', methods=['GET'])
def verify(figure):
    """Recompute one figure; t comes from the query string."""
    try:
        t = request.args.get('t')
        if t is not None:
            is_valid, error_msg, t = InputValidator.validate_twist_parameter(t)
            if not is_valid:
                raise ValidationError(error_msg)
        report = verify_figure(figure, t)
        return jsonify({"success": report.passed, "report": report.to_json()})
    except Exception as e:
        return _failure(e)


@app.route('/health')
def health_check():
    """Health check endpoint."""
    return jsonify({
        "status": "healthy",
        "max_crossings": Config.MAX_CROSSINGS,
        "extended": Config.ENABLE_EXTENDED,
    })


@app.errorhandler(404)
def not_found(error):
    return jsonify({
        "success": False,
        "error": "Endpoint not found"
    }), 404


@app.errorhandler(500)
def internal_error(error):
    logger.error(f"Internal server error: {error}")
    return jsonify({
        "success": False,
        "error": "Internal server error"
    }), 500


if __name__ == '__main__':
    logger.info(f"Starting Khovanov width service on {Config.HOST}:{Config.PORT}...")
    app.run(host=Config.HOST, port=Config.PORT)
