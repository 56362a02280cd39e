import pytest
from hypothesis import given, settings, strategies as st

from carrieralloc.errors import DuplicateIdError, InvalidParameterError
from carrieralloc.grouping import Carrier, User, UserClass, build_groups, carrier_order
from carrieralloc.utility import Logarithmic

from instances import reference_scenario

LOG = Logarithmic(1, 100)


def test_reference_groups():
    sc = reference_scenario()
    g = build_groups(sc.users, sc.carriers)
    assert g.members[1] == {1, 2, 3, 4}
    assert g.members[2] == set(range(1, 9))
    assert g.vip[2] == {2, 4, 6, 8}
    assert g.regular[2] == {1, 3, 5, 7}
    assert g.unreachable() == []


def test_edge_of_coverage_is_outside():
    users = [User(1, UserClass.REGULAR, 500.0, LOG)]
    g = build_groups(users, [Carrier(1, 500.0, 10.0)])
    assert g.members[1] == frozenset()
    assert g.unreachable() == [1]


def test_carrier_order():
    assert carrier_order([Carrier(2, 1000, 1), Carrier(1, 500, 1)]) == [1, 2]
    assert carrier_order([Carrier(2, 500, 1), Carrier(1, 500, 1)]) == [1, 2]
    assert carrier_order([Carrier(7, 3, 1)]) == [7]


def test_user_class_rules():
    with pytest.raises(InvalidParameterError):
        User(1, UserClass.REGULAR, 1.0, LOG, r_req=5)
    with pytest.raises(InvalidParameterError):
        User(1, UserClass.VIP, 1.0, LOG, r_req=0)
    with pytest.raises(InvalidParameterError):
        User(1, UserClass.VIP, -1.0, LOG, r_req=1)
    assert UserClass.parse("vip") is UserClass.VIP
    assert UserClass.parse("Regular") is UserClass.REGULAR
    with pytest.raises(InvalidParameterError):
        UserClass.parse("gold")


def test_carrier_rules():
    with pytest.raises(InvalidParameterError):
        Carrier(1, 0.0, 10)
    with pytest.raises(InvalidParameterError):
        Carrier(1, 10, -1)


def test_duplicate_ids():
    u = User(1, UserClass.REGULAR, 1.0, LOG)
    with pytest.raises(DuplicateIdError):
        build_groups([u, u], [Carrier(1, 10, 1)])
    with pytest.raises(DuplicateIdError):
        build_groups([u], [Carrier(1, 10, 1), Carrier(1, 20, 1)])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1000), st.booleans()), min_size=1, max_size=12),
       st.lists(st.floats(1, 1000), min_size=1, max_size=5))
def test_group_invariants(user_specs, radii):
    users = [User(i, UserClass.VIP if vip else UserClass.REGULAR, d, LOG, 1.0 if vip else 0.0)
             for i, (d, vip) in enumerate(user_specs)]
    carriers = [Carrier(j, D, 1.0) for j, D in enumerate(radii)]
    g = build_groups(users, carriers)
    for c in carriers:
        assert g.vip[c.id] | g.regular[c.id] == g.members[c.id]
        assert not (g.vip[c.id] & g.regular[c.id])
        for u in users:
            assert (u.id in g.members[c.id]) == (c.id in g.in_range[u.id])
    order = carrier_order(carriers)
    for a, b in zip(order, order[1:]):
        assert g.members[a] <= g.members[b]
