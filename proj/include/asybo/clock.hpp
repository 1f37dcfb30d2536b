#ifndef ASYBO_CLOCK_HPP
#define ASYBO_CLOCK_HPP

#include <chrono>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace asybo {

/// Time source for the evaluation machinery, in seconds from an arbitrary
/// epoch. The virtual implementation lets latency studies run instantly.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;
  virtual void sleep_for(double seconds) = 0;
};

class RealClock final : public Clock {
 public:
  double now() override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_).count();
  }
  void sleep_for(double seconds) override {
    if (seconds > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  }

 private:
  std::chrono::steady_clock::time_point epoch_ = std::chrono::steady_clock::now();
};

/// Sleeping advances virtual time instead of blocking. Safe to share between
/// the evaluation loop and simulated backends.
class VirtualClock final : public Clock {
 public:
  double now() override {
    std::lock_guard<std::mutex> lock(mu_);
    return t_;
  }
  void sleep_for(double seconds) override {
    if (seconds < 0.0) throw std::invalid_argument("cannot sleep a negative duration");
    std::lock_guard<std::mutex> lock(mu_);
    t_ += seconds;
  }

 private:
  std::mutex mu_;
  double t_ = 0.0;
};

}  // namespace asybo

#endif  // ASYBO_CLOCK_HPP
