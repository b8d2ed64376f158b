#include "bibcoup/layout.hpp"

#include "bibcoup/common.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bibcoup {

namespace {

constexpr double kEps = 1e-9;
constexpr double kNodeSpeed = 0.1;    // ks
constexpr double kMaxNodeSpeed = 10;  // ksmax: caps displacement per step

struct Vec2 {
    double x = 0.0, y = 0.0;
};

/// Quadtree over node positions for Barnes-Hut repulsion. Mass of a body is
/// deg+1; cells store total mass and center of mass.
class QuadTree {
public:
    QuadTree(const std::vector<Vec2>& pos, const std::vector<double>& mass) {
        double min_x = pos[0].x, max_x = pos[0].x;
        double min_y = pos[0].y, max_y = pos[0].y;
        for (const Vec2& p : pos) {
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }
        const double half =
            std::max(max_x - min_x, max_y - min_y) / 2.0 + kEps;
        root_cx_ = (min_x + max_x) / 2.0;
        root_cy_ = (min_y + max_y) / 2.0;
        root_half_ = half;
        nodes_.reserve(pos.size() * 2);
        nodes_.push_back(Cell{});
        for (std::size_t i = 0; i < pos.size(); ++i) {
            insert(0, root_cx_, root_cy_, root_half_, i, pos, mass, 0);
        }
    }

    /// Accumulated repulsion on body i (excluding itself).
    Vec2 repulsion(std::size_t i, const std::vector<Vec2>& pos,
                   const std::vector<double>& mass, double coefficient,
                   double theta) const {
        Vec2 force{};
        walk(0, root_half_, i, pos, mass, coefficient, theta, force);
        return force;
    }

private:
    struct Cell {
        double mass = 0.0;
        double com_x = 0.0, com_y = 0.0;  // center of mass
        long body = -1;                   // body index when a leaf holds one
        int children[4] = {-1, -1, -1, -1};
        bool split = false;
    };

    void insert(int cell, double cx, double cy, double half, std::size_t body,
                const std::vector<Vec2>& pos, const std::vector<double>& mass,
                int depth) {
        Cell& c = nodes_[static_cast<std::size_t>(cell)];
        const double m = mass[body];
        const double px = pos[body].x, py = pos[body].y;

        if (c.mass == 0.0 && !c.split) {  // empty leaf
            c.mass = m;
            c.com_x = px;
            c.com_y = py;
            c.body = static_cast<long>(body);
            return;
        }

        // Occupied leaf: push the resident body down, then insert the new
        // one. Depth cap collapses coincident points into one aggregate.
        if (!c.split) {
            if (depth >= 48) {
                c.com_x = (c.com_x * c.mass + px * m) / (c.mass + m);
                c.com_y = (c.com_y * c.mass + py * m) / (c.mass + m);
                c.mass += m;
                return;
            }
            const long resident = c.body;
            c.split = true;
            c.body = -1;
            if (resident >= 0) {
                descend(cell, cx, cy, half, static_cast<std::size_t>(resident),
                        pos, mass, depth);
            }
        }
        {
            Cell& cc = nodes_[static_cast<std::size_t>(cell)];
            cc.com_x = (cc.com_x * cc.mass + px * m) / (cc.mass + m);
            cc.com_y = (cc.com_y * cc.mass + py * m) / (cc.mass + m);
            cc.mass += m;
        }
        descend(cell, cx, cy, half, body, pos, mass, depth);
    }

    void descend(int cell, double cx, double cy, double half, std::size_t body,
                 const std::vector<Vec2>& pos, const std::vector<double>& mass,
                 int depth) {
        const int quadrant = (pos[body].x >= cx ? 1 : 0) |
                             (pos[body].y >= cy ? 2 : 0);
        int child = nodes_[static_cast<std::size_t>(cell)].children[quadrant];
        if (child < 0) {
            child = static_cast<int>(nodes_.size());
            nodes_.push_back(Cell{});
            nodes_[static_cast<std::size_t>(cell)].children[quadrant] = child;
        }
        const double h = half / 2.0;
        insert(child, cx + (quadrant & 1 ? h : -h),
               cy + (quadrant & 2 ? h : -h), h, body, pos, mass, depth + 1);
    }

    void walk(int cell, double half, std::size_t i,
              const std::vector<Vec2>& pos, const std::vector<double>& mass,
              double coefficient, double theta, Vec2& force) const {
        const Cell& c = nodes_[static_cast<std::size_t>(cell)];
        if (c.mass == 0.0) return;
        if (!c.split && c.body == static_cast<long>(i)) return;

        const double dx = pos[i].x - c.com_x;
        const double dy = pos[i].y - c.com_y;
        const double dist = std::max(std::sqrt(dx * dx + dy * dy), kEps);

        if (!c.split || (2.0 * half / dist) < theta) {
            const double f = coefficient * mass[i] * c.mass / dist;
            force.x += dx / dist * f;
            force.y += dy / dist * f;
            return;
        }
        for (int child : c.children) {
            if (child >= 0) {
                walk(child, half / 2.0, i, pos, mass, coefficient, theta,
                     force);
            }
        }
    }

    std::vector<Cell> nodes_;
    double root_cx_ = 0.0, root_cy_ = 0.0, root_half_ = 0.0;
};

}  // namespace

LayoutPositions forceatlas2(const CouplingGraph& graph, int iterations,
                            const LayoutParams& params, std::uint64_t seed) {
    if (iterations < 1) {
        throw ValidationError("forceatlas2 requires iterations >= 1");
    }
    if (graph.nodes.empty()) {
        throw ValidationError("forceatlas2 requires a non-empty graph");
    }
    const std::size_t n = graph.nodes.size();

    Rng rng(seed);
    std::vector<Vec2> pos(n);
    for (Vec2& p : pos) {
        p.x = rng.unit();
        p.y = rng.unit();
    }

    std::vector<double> mass(n);  // deg + 1
    for (std::size_t i = 0; i < n; ++i) mass[i] = graph.nodes[i].degree + 1.0;

    std::vector<Vec2> force(n), prev_force(n);
    double global_speed = 1.0;
    const bool use_tree = n > params.barnes_hut_threshold;

    for (int iter = 0; iter < iterations; ++iter) {
        std::swap(force, prev_force);
        std::fill(force.begin(), force.end(), Vec2{});

        // Repulsion: k_r (deg_u+1)(deg_v+1) / d.
        if (use_tree) {
            QuadTree tree(pos, mass);
            for (std::size_t i = 0; i < n; ++i) {
                force[i] = tree.repulsion(i, pos, mass, params.repulsion,
                                          params.theta);
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double dx = pos[i].x - pos[j].x;
                    const double dy = pos[i].y - pos[j].y;
                    const double dist =
                        std::max(std::sqrt(dx * dx + dy * dy), kEps);
                    const double f =
                        params.repulsion * mass[i] * mass[j] / dist;
                    const double fx = dx / dist * f, fy = dy / dist * f;
                    force[i].x += fx;
                    force[i].y += fy;
                    force[j].x -= fx;
                    force[j].y -= fy;
                }
            }
        }

        // Attraction along edges, proportional to distance (or log(1+d)).
        for (const CouplingEdge& e : graph.edges) {
            const double w =
                params.edge_weight_attraction ? e.weight : 1.0;
            const double dx = pos[e.b].x - pos[e.a].x;
            const double dy = pos[e.b].y - pos[e.a].y;
            const double dist = std::max(std::sqrt(dx * dx + dy * dy), kEps);
            double f = params.attraction * w;
            if (params.linlog) {
                f *= std::log1p(dist) / dist;
            }
            force[e.a].x += dx * f;
            force[e.a].y += dy * f;
            force[e.b].x -= dx * f;
            force[e.b].y -= dy * f;
        }

        // Gravity toward the centroid.
        if (params.gravity > 0.0) {
            double cx = 0.0, cy = 0.0;
            for (const Vec2& p : pos) {
                cx += p.x;
                cy += p.y;
            }
            cx /= static_cast<double>(n);
            cy /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double dx = cx - pos[i].x;
                const double dy = cy - pos[i].y;
                const double dist =
                    std::max(std::sqrt(dx * dx + dy * dy), kEps);
                const double f = params.gravity * mass[i];
                force[i].x += dx / dist * f;
                force[i].y += dy / dist * f;
            }
        }

        // Swing-based adaptive speed.
        double swing_total = 0.0, traction_total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sx = force[i].x - prev_force[i].x;
            const double sy = force[i].y - prev_force[i].y;
            const double tx = force[i].x + prev_force[i].x;
            const double ty = force[i].y + prev_force[i].y;
            swing_total += mass[i] * std::sqrt(sx * sx + sy * sy);
            traction_total += mass[i] * std::sqrt(tx * tx + ty * ty) / 2.0;
        }
        double target = swing_total > kEps
                            ? params.speed_tolerance * traction_total /
                                  swing_total
                            : global_speed * 1.5;
        global_speed = std::min(target, global_speed * 1.5);

        for (std::size_t i = 0; i < n; ++i) {
            const double sx = force[i].x - prev_force[i].x;
            const double sy = force[i].y - prev_force[i].y;
            const double swing = std::sqrt(sx * sx + sy * sy);
            double speed =
                kNodeSpeed * global_speed / (1.0 + global_speed * std::sqrt(swing));
            const double fmag = std::sqrt(force[i].x * force[i].x +
                                          force[i].y * force[i].y);
            if (fmag > kEps) {
                speed = std::min(speed, kMaxNodeSpeed / fmag);
            }
            pos[i].x += force[i].x * speed;
            pos[i].y += force[i].y * speed;
        }
    }

    LayoutPositions out;
    out.iterations_run = iterations;
    out.seed = seed;
    for (std::size_t i = 0; i < n; ++i) {
        out.positions[graph.nodes[i].id] = {pos[i].x, pos[i].y};
    }
    return out;
}

std::map<std::string, NodeAttribute> node_attributes(
    const CouplingGraph& graph, const CommunityAssignment& assignment,
    double min_size, double max_size) {
    std::uint32_t deg_min = 0, deg_max = 0;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const std::uint32_t d = graph.nodes[i].degree;
        if (i == 0) {
            deg_min = deg_max = d;
        } else {
            deg_min = std::min(deg_min, d);
            deg_max = std::max(deg_max, d);
        }
    }

    std::map<std::string, NodeAttribute> out;
    for (const CouplingNode& node : graph.nodes) {
        auto it = assignment.membership.find(node.id);
        if (it == assignment.membership.end()) {
            throw ValidationError("assignment does not cover node: " + node.id);
        }
        NodeAttribute attr;
        attr.color_index = it->second;
        if (deg_max == deg_min) {
            attr.size = min_size;
        } else {
            attr.size = min_size + (node.degree - deg_min) *
                                       (max_size - min_size) /
                                       (deg_max - deg_min);
        }
        out[node.id] = attr;
    }
    return out;
}

}  // namespace bibcoup
