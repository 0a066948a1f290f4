"""测试 HTTP 接口"""

from pathlib import Path

import numpy as np
import pytest
from fastapi import FastAPI
from fastapi.testclient import TestClient

from germrenorm.core.app import create_app_manager
from germrenorm.core.exceptions import EXIT_INPUT, EXIT_PRECONDITION
from germrenorm.core.server import RenormController, create_app

EXAMPLE_CONFIG = Path(__file__).parent.parent / "config.example.json"

BANANA_2 = {"vertices": [1, 2], "edges": [[1, 2], [1, 2]]}
TRIANGLE = {"vertices": [1, 2, 3], "edges": [[1, 2], [2, 3], [1, 3]]}


@pytest.fixture(scope="module")
def client():
    manager = create_app_manager(config_path=str(EXAMPLE_CONFIG), logger={"rich": False})
    with TestClient(create_app(manager)) as test_client:
        yield test_client


class TestApplication:
    """应用的构建"""

    def test_create_app(self):
        """测试应用标题与版本来自配置"""
        app = create_app(create_app_manager(config_path=str(EXAMPLE_CONFIG)))
        assert isinstance(app, FastAPI)
        assert app.title == "germrenorm"
        assert app.version == "0.1.0"

    def test_controller_routes(self):
        """测试控制器注册的路由"""
        engine = create_app_manager(config_path=str(EXAMPLE_CONFIG)).get_engine()
        paths = {route.path for route in RenormController(engine).router.routes}
        assert paths == {"/health", "/poles", "/tree", "/germ", "/renormalize"}


class TestRoutes:
    """各个路由的响应"""

    def test_health(self, client):
        """测试健康检查返回默认几何"""
        response = client.get("/health")
        assert response.status_code == 200
        body = response.json()
        assert body["code"] == 200
        assert body["data"]["status"] == "ok"
        assert body["data"]["geometry"]["dim"] == 4

    def test_poles(self, client):
        """测试 d=4 双边香蕉图的发散报告"""
        response = client.post("/poles", json={"graph": BANANA_2, "dim": 4})
        assert response.status_code == 200
        data = response.json()["data"]
        assert data["divergent_subgraphs"] == [[1, 2]]
        assert data["hyperplanes"][0]["rhs"] == 2
        assert data["order_bound"] == 1

    def test_tree(self, client):
        """测试三角形的扇区树"""
        response = client.post("/tree", json={"graph": TRIANGLE, "lengths": [0.1, 0.2, 0.3]})
        assert response.status_code == 200
        data = response.json()["data"]
        assert data["order"] == [1, 2, 3]
        assert data["tree"] == [1, 2]
        assert [c["edge"] for c in data["cycles"]] == [3]

    def test_renormalize(self, client):
        """测试 d=3 单边图的重整化值"""
        body = {
            "graph": {"vertices": [1, 2], "edges": [[1, 2]]},
            "geometry": {"dim": 3},
            "testfn": [{"center": [0.0, 0.0, 0.0, 1.0, 0.0, 0.0], "width": 0.7}],
            "order": 1,
        }
        response = client.post("/renormalize", json=body)
        assert response.status_code == 200
        data = response.json()["data"]
        assert data["realized_poles"] == []
        assert np.isfinite(data["value"][0])
        assert data["value"][0] > 0


class TestErrorEnvelope:
    """错误响应的统一格式"""

    def test_invalid_graph(self, client):
        """测试自环返回 400 与输入错误退出码"""
        graph = {"vertices": [1, 2], "edges": [[1, 1]]}
        response = client.post("/poles", json={"graph": graph, "dim": 4})
        assert response.status_code == 400
        body = response.json()
        assert "self-loop" in body["message"]
        assert body["data"] == {"exit_code": EXIT_INPUT}

    def test_tied_lengths(self, client):
        """测试长度相等返回 422 与前置条件退出码"""
        response = client.post("/tree", json={"graph": TRIANGLE, "lengths": [0.1, 0.1, 0.3]})
        assert response.status_code == 422
        body = response.json()
        assert body["message"] == "strict metric required"
        assert body["data"]["exit_code"] == EXIT_PRECONDITION

    def test_validation_error(self, client):
        """测试请求体校验失败"""
        response = client.post("/poles", json={"graph": BANANA_2})
        assert response.status_code == 422
        body = response.json()
        assert body["message"] == "Validation Error"
        assert isinstance(body["data"], list)
