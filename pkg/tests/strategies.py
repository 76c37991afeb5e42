from hypothesis import strategies as st

from twofacility.core import DEFAULT_DOMAIN, WIDE_DOMAIN, LineInstance, Solution


@st.composite
def instances(draw, m_max=12, n_min=2, n_max=None, allow_empty=False):
    m = draw(st.integers(max(2, n_min), m_max))
    n = draw(st.integers(n_min, m if n_max is None else min(m, n_max)))
    positions = sorted(draw(st.sets(st.integers(1, m), min_size=n, max_size=n)))
    domain = WIDE_DOMAIN if allow_empty else DEFAULT_DOMAIN
    prefs = draw(st.lists(st.sampled_from(domain), min_size=n, max_size=n))
    return LineInstance.build(m, positions, prefs)


@st.composite
def instance_and_solution(draw, **kw):
    inst = draw(instances(allow_empty=True, **kw))
    z1 = draw(st.integers(1, inst.m))
    z2 = draw(st.integers(1, inst.m).filter(lambda z: z != z1))
    return inst, Solution(z1, z2)
