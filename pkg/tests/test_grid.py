from __future__ import annotations

import random

import pytest

from mapfkit import GridMap, MapParseError, UNREACHABLE, bfs_dist_table, parse_map
from mapfkit.bench import generate_map

from conftest import fixture_text


def _map_text(rows: list[str]) -> str:
    return (
        f"type octile\nheight {len(rows)}\nwidth {len(rows[0])}\nmap\n"
        + "\n".join(rows)
        + "\n"
    )


class TestParseMap:
    def test_corridor(self):
        grid = parse_map(_map_text(["..."]))
        assert grid.num_vertices == 3
        assert grid.degree(1) == 2
        assert grid.degree(0) == 1
        assert grid.degree(2) == 1

    def test_l_shape(self):
        grid = parse_map(_map_text([".@", ".."]))
        assert grid.num_vertices == 3
        assert sorted(grid.degree(v) for v in range(3)) == [1, 1, 2]
        assert grid.degree(grid.vertex_at(0, 1)) == 2

    def test_bundled_random_32_32_20(self):
        grid = parse_map(fixture_text("random-32-32-20.map"))
        assert grid.width == 32 and grid.height == 32
        assert grid.num_vertices == 819

    def test_crlf_tolerated(self):
        grid = parse_map(_map_text(["..", ".."]).replace("\n", "\r\n"))
        assert grid.num_vertices == 4

    def test_terrain_characters(self):
        grid = parse_map(_map_text([".G", "SW", "@O", "T."]))
        assert grid.num_vertices == 3  # G passable; S, W, @, O, T blocked

    @pytest.mark.parametrize(
        "text, line",
        [
            ("type quad\nheight 1\nwidth 1\nmap\n.\n", "line 1"),
            ("type octile\nheight x\nwidth 1\nmap\n.\n", "line 2"),
            ("type octile\nheight 1\nwidth 0\nmap\n\n", "line 3"),
            ("type octile\nheight 1\nwidth 1\nmop\n.\n", "line 4"),
            ("type octile\nheight 2\nwidth 1\nmap\n.\n", "line"),
            ("type octile\nheight 1\nwidth 2\nmap\n.\n", "line 5"),
            ("type octile\nheight 1\nwidth 1\nmap\n?\n", "line 5"),
        ],
    )
    def test_errors_name_lines(self, text, line):
        with pytest.raises(MapParseError, match=line):
            parse_map(text)


class TestNeighbors:
    def test_interior_has_four(self):
        grid = parse_map(_map_text(["...", "...", "..."]))
        center = grid.vertex_at(1, 1)
        assert len(grid.neighbors(center)) == 4

    def test_order_up_right_down_left(self):
        grid = parse_map(_map_text(["...", "...", "..."]))
        assert grid.neighbors(grid.vertex_at(1, 1)) == (
            grid.vertex_at(1, 0),
            grid.vertex_at(2, 1),
            grid.vertex_at(1, 2),
            grid.vertex_at(0, 1),
        )

    def test_corner_has_two(self):
        grid = parse_map(_map_text(["...", "...", "..."]))
        assert len(grid.neighbors(grid.vertex_at(0, 0))) == 2

    def test_corridor_end_has_one(self):
        grid = parse_map(_map_text(["..."]))
        assert len(grid.neighbors(0)) == 1

    def test_invalid_vertex_rejected(self):
        grid = parse_map(_map_text(["..."]))
        with pytest.raises(ValueError):
            grid.neighbors(3)
        with pytest.raises(ValueError):
            grid.degree(-1)

    def test_symmetry_on_random_maps(self):
        rng = random.Random(5)
        for _ in range(20):
            grid = generate_map(8, 8, rng.uniform(0.0, 0.4), rng)
            for v in range(grid.num_vertices):
                for u in grid.neighbors(v):
                    assert v in grid.neighbors(u)


class TestDistTable:
    def test_corridor_from_left_end(self):
        grid = parse_map(_map_text(["...."]))
        table = bfs_dist_table(grid, 0)
        assert list(table.dist) == [0, 1, 2, 3]

    def test_isolated_component_unreachable(self):
        grid = parse_map(_map_text([".@."]))
        table = bfs_dist_table(grid, 0)
        assert table[0] == 0
        assert table[1] == UNREACHABLE

    def test_empty_32x32_opposite_corners(self):
        grid = GridMap(32, 32, [True] * (32 * 32))
        table = bfs_dist_table(grid, grid.vertex_at(0, 0))
        assert table[grid.vertex_at(31, 31)] == 62

    def test_bfs_consistency_on_random_maps(self):
        rng = random.Random(11)
        for _ in range(10):
            grid = generate_map(10, 10, rng.uniform(0.0, 0.35), rng)
            target = rng.randrange(grid.num_vertices)
            table = grid.dist_table(target)
            for v in range(grid.num_vertices):
                for u in grid.neighbors(v):
                    if table[v] != UNREACHABLE and table[u] != UNREACHABLE:
                        assert abs(table[v] - table[u]) <= 1

    def test_dist_table_cached(self, tunnel_grid):
        assert tunnel_grid.dist_table(3) is tunnel_grid.dist_table(3)


def test_serialize_reparse_round_trip():
    rng = random.Random(3)
    for _ in range(10):
        grid = generate_map(7, 5, rng.uniform(0.0, 0.5), rng)
        again = parse_map(grid.to_text())
        assert again == grid
        assert again.num_vertices == grid.num_vertices
