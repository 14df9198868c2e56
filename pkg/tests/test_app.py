import pytest

from app import app
from config import Config


@pytest.fixture
def client():
    app.config['TESTING'] = True
    with app.test_client() as client:
        yield client


def test_index_lists_routes(client):
    response = client.get('/')
    assert response.status_code == 200
    assert '/api/kh' in response.get_json()['routes']


def test_health(client):
    data = client.get('/health').get_json()
    assert data['status'] == 'healthy'
    assert data['max_crossings'] == Config.MAX_CROSSINGS


def test_kh_table(client):
    response = client.get('/api/kh', query_string={'braid': '2: 1 1 1'})
    assert response.status_code == 200
    data = response.get_json()
    assert data['success'] is True
    assert data['table']['entries'] == [
        {'delta2': -2, 'q2': 2, 'rank': 1},
        {'delta2': -2, 'q2': 6, 'rank': 1},
        {'delta2': -2, 'q2': 8, 'rank': 1},
    ]
    assert '(delta)' in data['ascii']


def test_width_and_det(client):
    assert client.get('/api/width', query_string={'braid': '3: 2 1 2 1 2 1 2 1'}).get_json()['width'] == 2
    assert client.get('/api/det', query_string={'braid': '3: 1 -2 1 -2'}).get_json()['det'] == 5


def test_turner(client):
    data = client.post('/api/turner', json={'braid': '2: 1 1'}).get_json()
    assert data['diagonals'] == {'0': 1, '2': 1}
    assert data['lower_bound']['passed'] is True


def test_bad_braid_is_400(client):
    response = client.get('/api/kh', query_string={'braid': '2: 7'})
    assert response.status_code == 400
    assert response.get_json()['success'] is False


def test_crossing_cap_is_422(client, monkeypatch):
    monkeypatch.setattr(Config, 'MAX_CROSSINGS', 2)
    response = client.get('/api/kh', query_string={'braid': '2: 1 1 1'})
    assert response.status_code == 422


def test_unknown_endpoints_are_404(client):
    assert client.get('/api/knots', query_string={'braid': '1:'}).status_code == 404
    assert client.get('/nowhere').status_code == 404


def test_cone_post(client):
    response = client.post('/api/cone', json={'braid': '2: 1 1 1', 'crossing': 0})
    assert response.status_code == 200
    data = response.get_json()
    assert data['c'] == 2
    assert data['report']['passed'] is True


def test_cone_errors(client):
    assert client.post('/api/cone', json={'braid': '2: 1 1 1'}).status_code == 400
    assert client.post('/api/cone', json={'braid': '3: 1 -2 1 -2', 'crossing': 1}).status_code == 400


def test_e1(client):
    data = client.post('/api/e1', json={'braid': '3: 2 1 2 1 2 1', 'crossings': [0, 1]}).get_json()
    assert data['page']['constants'] == [3, 3]
    assert data['report']['defect'] == 0


def test_twistknot_width(client):
    response = client.get('/api/twistknot', query_string={'t': 1, 'framing': -1, 'action': 'width'})
    assert response.status_code == 200
    assert response.get_json()['width'] == 2
    assert response.get_json()['input'] == 'tau_1(-1)'


def test_twistknot_needs_one_coefficient(client):
    response = client.get('/api/twistknot', query_string={'t': 1, 'framing': -1, 'slope': '1/2'})
    assert response.status_code == 400
    response = client.get('/api/twistknot', query_string={'t': 1})
    assert response.status_code == 400


def test_twistknot_extended_gate(client, monkeypatch):
    monkeypatch.setattr(Config, 'ENABLE_EXTENDED', False)
    response = client.get('/api/twistknot', query_string={'t': 3, 'framing': -1, 'action': 'width'})
    assert response.status_code == 422


def test_verify_extended_gate(client, monkeypatch):
    monkeypatch.setattr(Config, 'ENABLE_EXTENDED', False)
    response = client.get('/api/verify/branch-set', query_string={'t': 3})
    assert response.status_code == 422


def test_no_session_secret_is_configured():
    assert app.config['SECRET_KEY'] is None


def test_verdict(client):
    data = client.get('/api/verdict/0').get_json()
    assert data['success'] is True
    assert data['verdict'] == 'inconclusive'
    assert client.get('/api/verdict/x').status_code == 400


def test_verify_anchors(client):
    data = client.get('/api/verify/anchors').get_json()
    assert data['success'] is True
    assert data['report']['figure'] == 'anchors'
    assert client.get('/api/verify/unknown').status_code == 400
