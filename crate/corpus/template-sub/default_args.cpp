template <typename T = int, int N = 4>
struct Buffer {
  T data[N];
  int capacity() { return N; }
};
int main() {
  Buffer<> a;
  Buffer<bool> b;
  Buffer<int, 9> c;
  assert(a.capacity() == 4 && b.capacity() == 4 && c.capacity() == 9);
  return 0;
}
