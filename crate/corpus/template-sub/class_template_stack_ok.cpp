template <typename T, int N>
struct Stack {
  T items[N];
  int top;
  Stack() { top = 0; }
  void push(T v) {
    if (top < N) {
      items[top] = v;
      top++;
    }
  }
  int size() { return top; }
};
int main() {
  Stack<int, 2> s;
  s.push(1);
  s.push(2);
  s.push(3);
  assert(s.size() == 2);
  return 0;
}
