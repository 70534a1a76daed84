import math
import random

import pytest

from urbanseal.city import (CityFormatError, CityModel, RouteSamplingError,
                            Street, generate_grid_city, load_city,
                            place_devices, sample_route)


def test_grid_street_counts():
    assert len(generate_grid_city(1, 1).streets) == 4
    city = generate_grid_city(2, 2)
    assert len(city.streets) == 6
    assert city.graph().number_of_edges() == 12


def test_grid_segment_lengths_divide_street_length():
    city = generate_grid_city(3, 2, block_size=100.0, segments_per_block=2)
    for street in city.streets.values():
        seg = street.length / street.rho
        assert seg == pytest.approx(50.0)


def test_grid_rejects_bad_dimensions():
    with pytest.raises(ValueError):
        generate_grid_city(0, 1)
    with pytest.raises(ValueError):
        generate_grid_city(1, 1, block_size=0)


def test_street_validation():
    with pytest.raises(ValueError):
        Street("x", 0, [(0.0, 0.0), (1.0, 0.0)])
    with pytest.raises(ValueError):
        Street("x", 1, [(0.0, 0.0), (0.0, 0.0)])


def test_city_file_round(tmp_path):
    path = tmp_path / "city.txt"
    path.write_text("# comment\ncity demo\n"
                    "street main 4 0,0 400,0\n"
                    "street side 2 0,0 0,200\n")
    city = load_city(str(path))
    assert city.name == "demo"
    assert set(city.streets) == {"main", "side"}
    assert city.streets["main"].rho == 4


@pytest.mark.parametrize("body,fragment", [
    ("street a 1 0,0 1,0\n", "before city"),
    ("city x\nstreet a 0 0,0 1,0\n", "positive segment count"),
    ("city x\nstreet a 1 0,0 1,0\nstreet a 1 0,0 2,0\n", "duplicate"),
    ("city x\nstreet a two 0,0 1,0\n", "malformed"),
    ("city x\nroad a 1 0,0 1,0\n", "unknown directive"),
    ("city x\n", "no streets"),
    ("", "no city"),
])
def test_city_file_errors(tmp_path, body, fragment):
    path = tmp_path / "bad.txt"
    path.write_text(body)
    with pytest.raises(CityFormatError, match=fragment):
        load_city(str(path))


def test_sample_route_distance_and_connectivity():
    city = generate_grid_city(6, 6, block_size=100.0)
    rng = random.Random(4)
    for _ in range(10):
        route = sample_route(city, 300.0, rng)
        assert math.dist(route.source, route.destination) == \
            pytest.approx(300.0, rel=0.01)
        assert route.segments
        graph = city.graph()
        for sid, seg in route.segments:
            assert 1 <= seg <= city.streets[sid].rho


def test_sample_route_failures():
    city = generate_grid_city(2, 2, block_size=100.0)
    rng = random.Random(0)
    with pytest.raises(RouteSamplingError):
        sample_route(city, 10000.0, rng)      # beyond the map diameter
    with pytest.raises(RouteSamplingError):
        sample_route(city, 0.0, rng)


def test_route_intervals_are_maximal_runs():
    from urbanseal.city import RouteSpec
    route = RouteSpec((0, 0), (1, 1), 10.0,
                      (("a", 2), ("a", 3), ("b", 1), ("a", 5)))
    assert route.intervals() == (("a", 2, 3), ("a", 5, 5), ("b", 1, 1))


def test_place_devices_unique_until_capacity():
    city = generate_grid_city(1, 1, block_size=100.0)
    rng = random.Random(2)
    placed = place_devices(city, 4, rng)
    assert len(placed) == len(set(placed)) == 4
    crowded = place_devices(city, 10, rng)
    assert len(crowded) == 10
