import pytest

from previz.meshio import (
    dump_mesh_binary,
    dump_mesh_text,
    load_mesh,
    loads_text,
)
from previz.scene import InvalidGeometry, ProxyGeometry


def tetra(colors=False):
    verts = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
    tris = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    cols = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0)] if colors else None
    return ProxyGeometry.mesh(verts, tris, cols)


class TestText:
    def test_round_trip(self, tmp_path):
        geom = tetra()
        path = tmp_path / "mesh.txt"
        path.write_text(dump_mesh_text(geom))
        assert load_mesh(path) == geom

    def test_round_trip_with_colors(self):
        geom = tetra(colors=True)
        assert loads_text(dump_mesh_text(geom)) == geom

    def test_rejects_wrong_magic(self):
        with pytest.raises(InvalidGeometry):
            loads_text("obj-file/9\nvertices 0\ntriangles 0\n")

    def test_rejects_truncated_body(self):
        text = dump_mesh_text(tetra())
        lines = text.splitlines()
        with pytest.raises(InvalidGeometry):
            loads_text("\n".join(lines[:-1]))

    def test_rejects_bad_index(self):
        with pytest.raises(InvalidGeometry):
            loads_text("previz-mesh/1\nvertices 1\ntriangles 1\n0 0 0\n0 1 2\n")


class TestBinary:
    def test_round_trip(self, tmp_path):
        geom = tetra(colors=True)
        path = tmp_path / "mesh.bin"
        path.write_bytes(dump_mesh_binary(geom))
        loaded = load_mesh(path)
        assert loaded.triangles == geom.triangles
        for a, b in zip(loaded.vertices, geom.vertices):
            assert a == pytest.approx(b, abs=1e-6)  # f32 storage

    def test_rejects_truncation(self, tmp_path):
        data = dump_mesh_binary(tetra())
        path = tmp_path / "mesh.bin"
        path.write_bytes(data[: len(data) - 5])
        with pytest.raises(InvalidGeometry):
            load_mesh(path)

    def test_rejects_trailing_garbage(self, tmp_path):
        path = tmp_path / "mesh.bin"
        path.write_bytes(dump_mesh_binary(tetra()) + b"xx")
        with pytest.raises(InvalidGeometry):
            load_mesh(path)


class TestSceneUse:
    def test_imported_mesh_renders(self):
        from previz.geometry import Transform, Vec3
        from previz.raster import render_frame
        from previz.scene import Camera, Light, Scene, SceneEntity

        geom = tetra()
        scene = Scene(
            id="s",
            entities=(SceneEntity(id="t", geometry=geom,
                                  transform=Transform(translation=Vec3(0, -0.3, -3))),),
            cameras=(Camera(id="c", fov_deg=60.0),),
            lights=(Light(id="a", kind="ambient"),),
        )
        frame = render_frame(scene, scene.cameras[0], (64, 64))
        assert (frame.id == 1).any()
