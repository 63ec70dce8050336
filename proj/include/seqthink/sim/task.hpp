#pragma once

#include <coroutine>
#include <exception>
#include <optional>
#include <utility>

namespace seqthink::sim {

/// Lazily-started coroutine used to write protocol automata.
///
/// A Task does nothing until it is awaited (or resumed by the kernel as a
/// top-level thread). Awaiting a Task runs it until its first suspension and
/// hands control back to the awaiter when it finishes, so nested protocol
/// procedures (acquire() inside a client loop, propose() inside a broadcast
/// task) compose without the kernel having to know about them.
template <class T = void>
class Task;

namespace detail {

struct PromiseBase {
  std::coroutine_handle<> continuation = std::noop_coroutine();
  std::exception_ptr error;

  std::suspend_always initial_suspend() noexcept { return {}; }

  struct FinalAwaiter {
    bool await_ready() noexcept { return false; }
    template <class Promise>
    std::coroutine_handle<> await_suspend(std::coroutine_handle<Promise> h) noexcept {
      return h.promise().continuation;
    }
    void await_resume() noexcept {}
  };
  FinalAwaiter final_suspend() noexcept { return {}; }

  void unhandled_exception() noexcept { error = std::current_exception(); }
};

template <class Promise>
class TaskBase {
 public:
  using handle_type = std::coroutine_handle<Promise>;

  TaskBase() = default;
  explicit TaskBase(handle_type h) : handle_(h) {}
  TaskBase(TaskBase&& other) noexcept : handle_(std::exchange(other.handle_, {})) {}
  TaskBase& operator=(TaskBase&& other) noexcept {
    if (this != &other) {
      reset();
      handle_ = std::exchange(other.handle_, {});
    }
    return *this;
  }
  TaskBase(const TaskBase&) = delete;
  TaskBase& operator=(const TaskBase&) = delete;
  ~TaskBase() { reset(); }

  bool valid() const noexcept { return static_cast<bool>(handle_); }
  bool done() const noexcept { return handle_ && handle_.done(); }
  handle_type handle() const noexcept { return handle_; }

  /// Rethrows an exception that escaped the coroutine body, if any.
  void rethrow_if_failed() const {
    if (handle_ && handle_.promise().error) std::rethrow_exception(handle_.promise().error);
  }

  bool await_ready() const noexcept { return false; }
  std::coroutine_handle<> await_suspend(std::coroutine_handle<> caller) noexcept {
    handle_.promise().continuation = caller;
    return handle_;
  }

 protected:
  void reset() noexcept {
    if (handle_) handle_.destroy();
    handle_ = {};
  }

  handle_type handle_{};
};

template <class T>
struct Promise : PromiseBase {
  std::optional<T> value;
  Task<T> get_return_object();
  template <class U>
  void return_value(U&& v) {
    value.emplace(std::forward<U>(v));
  }
};

template <>
struct Promise<void> : PromiseBase {
  Task<void> get_return_object();
  void return_void() noexcept {}
};

}  // namespace detail

template <class T>
class Task : public detail::TaskBase<detail::Promise<T>> {
 public:
  using promise_type = detail::Promise<T>;
  using detail::TaskBase<promise_type>::TaskBase;

  T await_resume() {
    this->rethrow_if_failed();
    return std::move(*this->handle_.promise().value);
  }
};

template <>
class Task<void> : public detail::TaskBase<detail::Promise<void>> {
 public:
  using promise_type = detail::Promise<void>;
  using detail::TaskBase<promise_type>::TaskBase;

  void await_resume() { rethrow_if_failed(); }
};

namespace detail {

template <class T>
Task<T> Promise<T>::get_return_object() {
  return Task<T>{std::coroutine_handle<Promise<T>>::from_promise(*this)};
}

inline Task<void> Promise<void>::get_return_object() {
  return Task<void>{std::coroutine_handle<Promise<void>>::from_promise(*this)};
}

}  // namespace detail

}  // namespace seqthink::sim
