#include "supnorm/shape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace supnorm {

namespace {

constexpr double kEdgeTol = 1e-9;   // closed-box membership slack
constexpr double kRimTol = 1e-12;   // strict-inequality slack for circles
constexpr double kSlitTol = 1e-9;   // half-width of the slit exclusion band

class BoxShape final : public Shape {
public:
    BoxShape(Vec2 lo, Vec2 hi) : lo_(lo), hi_(hi) {
        if (hi_.x < lo_.x || hi_.y < lo_.y)
            throw std::invalid_argument("box: hi must dominate lo");
        degenerate_x_ = (hi_.x - lo_.x) == 0.0;
        degenerate_y_ = (hi_.y - lo_.y) == 0.0;
    }

    bool contains(Vec2 p) const override {
        return p.x >= lo_.x - kEdgeTol && p.x <= hi_.x + kEdgeTol &&
               p.y >= lo_.y - kEdgeTol && p.y <= hi_.y + kEdgeTol;
    }

    double boundary_distance(Vec2 p) const override {
        double d = std::numeric_limits<double>::infinity();
        if (!degenerate_x_) d = std::min({d, p.x - lo_.x, hi_.x - p.x});
        if (!degenerate_y_) d = std::min({d, p.y - lo_.y, hi_.y - p.y});
        if (degenerate_x_ && degenerate_y_) d = 0.0;
        return std::max(d, 0.0);
    }

    std::array<Vec2, 2> bbox() const override { return {lo_, hi_}; }
    std::string name() const override { return "box"; }

private:
    Vec2 lo_, hi_;
    bool degenerate_x_ = false, degenerate_y_ = false;
};

class DiscShape final : public Shape {
public:
    DiscShape(Vec2 c, double r) : c_(c), r_(r) {
        if (!(r > 0.0)) throw std::invalid_argument("disc: radius must be positive");
    }
    bool contains(Vec2 p) const override { return norm(p - c_) < r_ - kRimTol; }
    double boundary_distance(Vec2 p) const override {
        return std::max(0.0, r_ - norm(p - c_));
    }
    std::array<Vec2, 2> bbox() const override {
        return {Vec2{c_.x - r_, c_.y - r_}, Vec2{c_.x + r_, c_.y + r_}};
    }
    std::string name() const override { return "disc"; }

private:
    Vec2 c_;
    double r_;
};

class AnnulusShape : public Shape {
public:
    AnnulusShape(Vec2 c, double r_in, double r_out) : c_(c), rin_(r_in), rout_(r_out) {
        if (!(r_in > 0.0) || !(r_out > r_in))
            throw std::invalid_argument("annulus: need 0 < r_in < r_out");
    }
    bool contains(Vec2 p) const override {
        double r = norm(p - c_);
        return r > rin_ + kRimTol && r < rout_ - kRimTol;
    }
    double boundary_distance(Vec2 p) const override {
        double r = norm(p - c_);
        return std::max(0.0, std::min(r - rin_, rout_ - r));
    }
    std::array<Vec2, 2> bbox() const override {
        return {Vec2{c_.x - rout_, c_.y - rout_}, Vec2{c_.x + rout_, c_.y + rout_}};
    }
    std::string name() const override { return "annulus"; }

protected:
    Vec2 c_;
    double rin_, rout_;
};

class SlitAnnulusShape final : public AnnulusShape {
public:
    using AnnulusShape::AnnulusShape;

    bool contains(Vec2 p) const override {
        if (!AnnulusShape::contains(p)) return false;
        return !on_slit(p);
    }
    double boundary_distance(Vec2 p) const override {
        double ring = AnnulusShape::boundary_distance(p);
        Vec2 a{c_.x, c_.y - rout_};
        Vec2 b{c_.x, c_.y - rin_};
        return std::min(ring, segment_distance(p, a, b));
    }
    std::string name() const override { return "slit_annulus"; }

private:
    bool on_slit(Vec2 p) const {
        return std::abs(p.x - c_.x) <= kSlitTol &&
               p.y - c_.y >= -rout_ - kSlitTol && p.y - c_.y <= -rin_ + kSlitTol;
    }
};

class MaskShape final : public Shape {
public:
    MaskShape(MaskImage img, Vec2 origin, double h)
        : img_(std::move(img)), origin_(origin), h_(h) {
        if (img_.width < 1 || img_.height < 1)
            throw std::invalid_argument("mask: empty image");
        if (!(h > 0.0)) throw std::invalid_argument("mask: h must be positive");
    }

    bool contains(Vec2 p) const override {
        int i = static_cast<int>(std::lround((p.x - origin_.x) / h_));
        int j = static_cast<int>(std::lround((p.y - origin_.y) / h_));
        if (i < 0 || i >= img_.width || j < 0 || j >= img_.height) return false;
        int row = img_.height - 1 - j;
        return img_.inside[static_cast<std::size_t>(row) * img_.width + i] != 0;
    }

    // Grid-level surrogate: distance to the nearest outside pixel center.
    double boundary_distance(Vec2 p) const override {
        if (!contains(p)) return 0.0;
        double best = std::numeric_limits<double>::infinity();
        for (int row = 0; row < img_.height; ++row) {
            for (int col = 0; col < img_.width; ++col) {
                if (img_.inside[static_cast<std::size_t>(row) * img_.width + col]) continue;
                Vec2 q{origin_.x + col * h_, origin_.y + (img_.height - 1 - row) * h_};
                best = std::min(best, norm(p - q));
            }
        }
        // fully inside masks: fall back to bbox distance
        if (!std::isfinite(best)) {
            auto bb = bbox();
            best = std::min({p.x - bb[0].x, bb[1].x - p.x, p.y - bb[0].y, bb[1].y - p.y});
        }
        return best;
    }

    std::array<Vec2, 2> bbox() const override {
        return {origin_, Vec2{origin_.x + (img_.width - 1) * h_,
                              origin_.y + (img_.height - 1) * h_}};
    }
    std::string name() const override { return "mask_file"; }

private:
    MaskImage img_;
    Vec2 origin_;
    double h_;
};

}  // namespace

std::shared_ptr<Shape> make_box(Vec2 lo, Vec2 hi) {
    return std::make_shared<BoxShape>(lo, hi);
}
std::shared_ptr<Shape> make_disc(Vec2 center, double radius) {
    return std::make_shared<DiscShape>(center, radius);
}
std::shared_ptr<Shape> make_annulus(Vec2 center, double r_in, double r_out) {
    return std::make_shared<AnnulusShape>(center, r_in, r_out);
}
std::shared_ptr<Shape> make_slit_annulus(Vec2 center, double r_in, double r_out) {
    return std::make_shared<SlitAnnulusShape>(center, r_in, r_out);
}
std::shared_ptr<Shape> make_mask(MaskImage image, Vec2 origin, double h) {
    return std::make_shared<MaskShape>(std::move(image), origin, h);
}

}  // namespace supnorm
