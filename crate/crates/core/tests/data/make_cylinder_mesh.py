"""Generates tests/data/cylinder_coarse.msh, the coarse channel-with-cylinder
fixture (Gmsh 2.2 ASCII), with a distmesh-style point relaxation.

Usage: python3 make_cylinder_mesh.py [output.msh]
"""
import sys
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay
rng = np.random.default_rng(7)
OUT = sys.argv[1] if len(sys.argv) > 1 else Path(__file__).with_name("cylinder_coarse.msh")
L, H, cx, cy, R = 2.2, 0.41, 0.2, 0.2, 0.05
def drect(p):
    return -np.minimum(np.minimum(p[:,0], L-p[:,0]), np.minimum(p[:,1], H-p[:,1]))
def dcirc(p):
    return np.hypot(p[:,0]-cx, p[:,1]-cy) - R
def fd(p):
    return np.maximum(drect(p), -dcirc(p))
h0, hmax = 0.01, 0.045
def fh(p):
    return np.minimum(h0 + 0.25*np.maximum(dcirc(p), 0), hmax)
# fixed boundary points: corners, circle, straight sides with size fh
def side(a, b):
    a, b = np.array(a, float), np.array(b, float)
    pts = [a]; t = 0.0; ln = np.linalg.norm(b-a)
    while True:
        x = a + (b-a)*t/ln
        t += fh(x[None])[0]
        if t >= ln - 0.5*fh(b[None])[0]: break
        pts.append(a + (b-a)*t/ln)
    return pts
fix = []
for a, b in [((0,0),(L,0)), ((L,0),(L,H)), ((L,H),(0,H)), ((0,H),(0,0))]:
    fix += side(a, b)
nc = int(round(2*np.pi*R/h0))
th = np.linspace(0, 2*np.pi, nc, endpoint=False)
fix += list(np.c_[cx+R*np.cos(th), cy+R*np.sin(th)])
fix = np.array(fix)
# initial interior points by rejection
g = np.mgrid[0:L:h0*0.9, 0:H:h0*0.9].reshape(2,-1).T
g = g[fd(g) < -0.5*h0]
r0 = 1/fh(g)**2
g = g[rng.random(len(g)) < r0/r0.max()]
p = np.vstack([fix, g]); nf = len(fix)
for it in range(150):
    tri = Delaunay(p).simplices
    c = p[tri].mean(1); tri = tri[fd(c) < -1e-4]
    bars = np.vstack([tri[:,[0,1]], tri[:,[1,2]], tri[:,[2,0]]]); bars = np.unique(np.sort(bars,1),axis=0)
    v = p[bars[:,0]] - p[bars[:,1]]; ln = np.hypot(v[:,0], v[:,1])
    hb = fh((p[bars[:,0]]+p[bars[:,1]])/2)
    L0 = hb*1.2*np.sqrt((ln**2).sum()/(hb**2).sum())
    F = np.maximum(L0-ln, 0)
    Fv = (F/ln)[:,None]*v
    Ft = np.zeros_like(p)
    np.add.at(Ft, bars[:,0], Fv); np.add.at(Ft, bars[:,1], -Fv)
    Ft[:nf] = 0
    p = p + 0.2*Ft
    d = fd(p); out = d > 0
    if out.any():
        e = 1e-8
        gx = (fd(p[out]+[e,0])-d[out])/e; gy = (fd(p[out]+[0,e])-d[out])/e
        p[out] -= (d[out]/(gx**2+gy**2))[:,None]*np.c_[gx,gy]
for v,a in [(0,0.0),(0,L),(1,0.0),(1,H)]:
    m = np.abs(p[:,v]-a) < 1e-9
    p[m,v] = a
tri = Delaunay(p).simplices
c = p[tri].mean(1); tri = tri[fd(c) < -1e-4]
# orient CCW
a = p[tri]; ar = (a[:,1,0]-a[:,0,0])*(a[:,2,1]-a[:,0,1]) - (a[:,2,0]-a[:,0,0])*(a[:,1,1]-a[:,0,1])
tri[ar<0] = tri[ar<0][:,[0,2,1]]
used = np.unique(tri); remap = -np.ones(len(p), int); remap[used] = np.arange(len(used)); p = p[used]; tri = remap[tri]
edges = np.vstack([tri[:,[0,1]], tri[:,[1,2]], tri[:,[2,0]]])
key, cnt = np.unique(np.sort(edges,1), axis=0, return_counts=True)
bnd = key[cnt==1]
def tag(e):
    m = p[e].mean(0); tol=1e-9
    if abs(m[0]) < tol: return 1
    if abs(m[0]-L) < tol: return 2
    if abs(m[1]) < tol or abs(m[1]-H) < tol: return 3
    assert abs(np.hypot(m[0]-cx, m[1]-cy) - R) < 1e-3, m
    return 4
tags = [tag(e) for e in bnd]
V, E, F = len(p), len(key), len(tri)
q = []
for t in tri:
    x = p[t]; l = [np.linalg.norm(x[i]-x[(i+1)%3]) for i in range(3)]
    d1, d2 = x[1] - x[0], x[2] - x[0]
    A = abs(d1[0] * d2[1] - d1[1] * d2[0]) / 2
    q.append(4*np.sqrt(3)*A/sum(li**2 for li in l))
print("V", V, "E", E, "F", F, "euler", V - E + F, "velocity dofs", 2 * (V + E), "min quality", min(q), "edges per tag", np.bincount(tags)[1:])
with open(OUT, "w") as f:
    f.write("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$PhysicalNames\n5\n1 1 \"inflow\"\n1 2 \"outflow\"\n1 3 \"walls\"\n1 4 \"cylinder\"\n2 5 \"fluid\"\n$EndPhysicalNames\n")
    f.write(f"$Nodes\n{V}\n")
    for i,x in enumerate(p): f.write(f"{i+1} {x[0]:.17g} {x[1]:.17g} 0\n")
    f.write("$EndNodes\n$Elements\n%d\n" % (len(bnd)+F))
    k = 1
    for e,tg in zip(bnd,tags):
        f.write(f"{k} 1 2 {tg} {tg} {e[0]+1} {e[1]+1}\n"); k+=1
    for t in tri:
        f.write(f"{k} 2 2 5 1 {t[0]+1} {t[1]+1} {t[2]+1}\n"); k+=1
    f.write("$EndElements\n")
