"""
Streamlit dashboard for the Drumhead API.

Run with: streamlit run dashboard/app.py
Make sure the FastAPI server is running first: uvicorn app.main:app --reload
"""
import json
import math

import requests
import streamlit as st

API_BASE = "http://localhost:8000"

SQUARE = "[[0, 0], [1, 0], [1, 1], [0, 1]]"

st.set_page_config(page_title="Drumhead", layout="wide")
st.title("Drumhead Dashboard")

page = st.sidebar.radio("Navigate", ["Measure Polygon", "Spectrum", "Hear a Shape"])


def post(path: str, payload: dict):
    """POST to the API; shows the error detail and returns None on failure."""
    try:
        response = requests.post(f"{API_BASE}{path}", json=payload)
    except requests.ConnectionError:
        st.error("Cannot connect to the API server. Is it running?")
        return None
    if response.status_code == 200:
        return response.json()
    detail = response.json().get("detail", "Request failed.")
    st.error(detail if isinstance(detail, str) else json.dumps(detail))
    return None


def parse_vertices(text: str):
    try:
        vertices = json.loads(text)
    except json.JSONDecodeError as e:
        st.error(f"Vertices must be a JSON list of [x, y] pairs: {e}")
        return None
    return vertices


# ── Page 1: Measure Polygon ─────────────────────────────────────────
if page == "Measure Polygon":
    st.header("Measure a Polygon")

    with st.form("measure_form"):
        text = st.text_area("Vertices (JSON)", SQUARE)
        submitted = st.form_submit_button("Measure")

    if submitted and (vertices := parse_vertices(text)) is not None:
        body = post("/geometry/measure", {"vertices": vertices})
        if body:
            col1, col2, col3 = st.columns(3)
            col1.metric("Area", f"{body['area']:.6g}")
            col2.metric("Perimeter", f"{body['perimeter']:.6g}")
            col3.metric("A / P^2", f"{body['shape_functional']:.6g}")
            if body["outside_hypothesis"]:
                st.warning("Reflex corner: the heat-invariant corner term does not apply.")
            st.json(body)


# ── Page 2: Spectrum ────────────────────────────────────────────────
elif page == "Spectrum":
    st.header("Dirichlet Eigenvalues")

    with st.form("fem_form"):
        text = st.text_area("Vertices (JSON)", SQUARE)
        count = st.number_input("Eigenvalues", min_value=1, max_value=200, value=10)
        level = st.slider("Refinement level", min_value=1, max_value=6, value=4)
        extrapolate = st.checkbox("Richardson extrapolation", value=True)
        submitted = st.form_submit_button("Compute")

    if submitted and (vertices := parse_vertices(text)) is not None:
        with st.spinner("Solving..."):
            body = post(
                "/spectra/fem",
                {"vertices": vertices, "count": int(count), "level": level, "extrapolate": extrapolate},
            )
        if body:
            st.metric("Interior nodes", body["interior_nodes"])
            rows = [
                {"index": k, "eigenvalue": lam, "error_estimate": err}
                for k, (lam, err) in enumerate(zip(body["eigenvalues"], body["error_estimates"]), 1)
            ]
            st.table(rows)
            st.line_chart({f"level {lvl}": values for lvl, values in zip(body["levels"], body["history"])})


# ── Page 3: Hear a Shape ────────────────────────────────────────────
elif page == "Hear a Shape":
    st.header("Reconstruct a Shape from its Heat Invariants")

    shape = st.selectbox("Class", ["parallelogram", "rectangle", "trapezoid", "regular"])
    with st.form("hear_form"):
        area = st.number_input("Area", value=math.sqrt(3), format="%.12f")
        perimeter = st.number_input("Perimeter", value=6.0, format="%.12f")
        a0 = st.number_input("Constant term a0", value=7 / 24, format="%.12f")
        geodesic = st.number_input("Shortest closed geodesic", value=2.0, format="%.12f") if shape == "trapezoid" else None
        n = st.number_input("Vertices", min_value=3, value=6) if shape == "regular" else None
        noise = st.number_input("Relative noise (0 for exact)", min_value=0.0, value=0.0, format="%.2e")
        submitted = st.form_submit_button("Hear")

    if submitted:
        if shape == "regular":
            payload = {"n": int(n), "area": area, "perimeter": perimeter}
        else:
            payload = {"area": area, "perimeter": perimeter, "a0": a0}
            if noise > 0:
                payload["noise"] = noise
            if geodesic is not None:
                payload["geodesic"] = geodesic
        body = post(f"/hear/{shape}", payload)
        if body:
            st.success(f"Heard a {shape}.")
            st.json(body)
