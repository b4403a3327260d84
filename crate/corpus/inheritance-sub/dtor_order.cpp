int trace = 0;
struct A {
  ~A() { trace = trace * 10 + 1; }
};
struct B : A {
  ~B() { trace = trace * 10 + 2; }
};
int main() {
  B *p = new B();
  delete p;
  assert(trace == 12);
  return 0;
}
